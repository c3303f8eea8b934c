"""
       Copyright 2026 Inmanta

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""

import re
from pathlib import Path
from typing import List, Optional, Set

import yaml
from pydantic import BaseModel

from agentscale.data import GROUNDING_CORPUS

STOPWORDS = set(
    "about also and are can for from have help into need please that the their them then this with you your what when"
    " which will would".split()
)


class Passage(BaseModel):
    id: str
    title: str
    text: str


def keywords(text: str) -> Set[str]:
    return {word for word in re.findall(r"[a-z]+", text.lower()) if len(word) > 2 and word not in STOPWORDS}


class Retriever:
    """
    Parent class for the grounding sources of the query pipeline.
    """

    def retrieve(self, query: str, k: int = 2) -> List[Passage]:
        raise NotImplementedError(f"Retriever {type(self).__name__} has no retrieve implementation")


class FixtureRetriever(Retriever):
    """
    Offline retriever over a fixed corpus, passages are ranked by the number of keywords they share with
    the query.  Passages sharing nothing are never returned.
    """

    def __init__(self, passages: List[Passage]) -> None:
        self.passages = passages
        self._keywords = [keywords(p.title + " " + p.text) for p in passages]

    @classmethod
    def from_file(cls, path: Optional[Path] = None) -> "FixtureRetriever":
        data = yaml.safe_load((path or GROUNDING_CORPUS).read_text(encoding="utf-8")) or {}
        return cls([Passage.model_validate(p) for p in data.get("passages", [])])

    def retrieve(self, query: str, k: int = 2) -> List[Passage]:
        wanted = keywords(query)
        scored = [(len(wanted & kw), p) for p, kw in zip(self.passages, self._keywords)]
        ranked = sorted((item for item in scored if item[0] > 0), key=lambda item: (-item[0], item[1].id))
        return [passage for _, passage in ranked[:k]]
