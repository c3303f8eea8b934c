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

import enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from agentscale.data import ISSUE_TAXONOMY
from agentscale.exceptions import SchemaError
from agentscale.helpers.utils import load_document

HEADER_KEY = "nexau_issues"
ISSUES_VERSION = 1

BRANCHES = ("instruction_following", "failure_analysis", "trace_anomalies", "tool_design")

TRUNCATION = "trace_anomalies.truncation"
REPETITION = "trace_anomalies.repetition"
PHANTOM_ARTIFACT = "reward_hacking.phantom_artifact"
TOOL_ERROR = "failure_analysis.tool_error"
PLACEHOLDER_OUTPUT = "tool_design.placeholder_output"
VERBOSE_RETURN = "tool_design.verbose_return"


class Severity(str, enum.Enum):
    MINOR = "minor"
    MAJOR = "major"
    CRITICAL = "critical"

    @property
    def rank(self) -> int:
        return list(Severity).index(self)

    def at_least(self, other: "Severity") -> bool:
        return self.rank >= other.rank


class IssueCategory(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    name: str
    description: str = ""
    severity: Severity = Severity.MAJOR
    children: List["IssueCategory"] = Field(default_factory=list)


IssueCategory.model_rebuild()


class IssueTaxonomy:
    """
    The closed set of issue categories a judge can report.  Categories form a tree whose top level holds the
    four fixed branches.
    """

    def __init__(self, categories: List[IssueCategory]) -> None:
        self.categories = categories
        self._index: Dict[str, IssueCategory] = {}
        for category in self.iter_categories():
            if category.id in self._index:
                raise SchemaError(f"Issue category id {category.id!r} is used twice", path=category.id)
            self._index[category.id] = category

        missing = [branch for branch in BRANCHES if branch not in {c.id for c in categories}]
        if missing:
            raise SchemaError(f"The issue taxonomy misses the top-level branch(es) {missing}", path="categories")

    def iter_categories(self) -> Iterator[IssueCategory]:
        def walk(category: IssueCategory) -> Iterator[IssueCategory]:
            yield category
            for child in category.children:
                yield from walk(child)

        for category in self.categories:
            yield from walk(category)

    def __contains__(self, category_id: object) -> bool:
        return category_id in self._index

    def get(self, category_id: str) -> Optional[IssueCategory]:
        return self._index.get(category_id)

    def severity(self, category_id: str) -> Severity:
        return self._index[category_id].severity

    @property
    def ids(self) -> List[str]:
        return list(self._index)


def parse_issue_taxonomy(document: str) -> IssueTaxonomy:
    data = load_document(document, HEADER_KEY, ISSUES_VERSION, "issue taxonomy")
    try:
        categories = [IssueCategory.model_validate(c) for c in data.get("categories", [])]
    except ValidationError as e:
        raise SchemaError(f"Invalid issue category: {e}", path="categories")
    return IssueTaxonomy(categories)


def load_issue_taxonomy(path: Optional[Path] = None) -> IssueTaxonomy:
    return parse_issue_taxonomy((path or ISSUE_TAXONOMY).read_text(encoding="utf-8"))
