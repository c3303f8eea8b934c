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
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator

from agentscale.quality.taxonomy import Severity

REPORT_SCHEMA_VERSION = 1


class Verdict(str, enum.Enum):
    KEEP = "keep"
    DROP = "drop"


class Issue(BaseModel):
    """
    One problem found in a trajectory.  The message range holds the seq of the first and last events
    showing it.
    """

    category: str
    message_range: Tuple[int, int]
    evidence: str = ""
    severity: Severity = Severity.MAJOR
    origin: str = "judge"

    @field_validator("message_range")
    @classmethod
    def _ordered(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] > value[1]:
            raise ValueError(f"message range {value} starts after it ends")
        return value

    @property
    def key(self) -> Tuple[str, int, int]:
        return self.category, self.message_range[0], self.message_range[1]


def merge_issues(*groups: List[Issue]) -> List[Issue]:
    """
    Merge issue lists, an issue already reported for the same category and range is dropped.
    """
    merged: List[Issue] = []
    seen = set()
    for issue in (issue for group in groups for issue in group):
        if issue.key not in seen:
            seen.add(issue.key)
            merged.append(issue)
    return sorted(merged, key=lambda i: (i.message_range, i.category))


class Assessment(BaseModel):
    """
    What the judge carries from one batch to the next, in place of the events it already saw.
    """

    issues: List[Issue] = Field(default_factory=list)
    summary: str = ""


class JudgeState(BaseModel):
    cursor: int = 1
    running_assessment: Assessment = Field(default_factory=Assessment)
    batch_size: int = Field(default=20, ge=1)
    steps: int = 0

    def advance(self, next_seq: int, assessment: Assessment) -> None:
        if next_seq < self.cursor:
            raise ValueError(f"The judge cursor can not move back from {self.cursor} to {next_seq}")
        self.cursor = next_seq
        self.running_assessment = assessment
        self.steps += 1


class IssueReport(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    trajectory_id: str
    issues: List[Issue] = Field(default_factory=list)
    verdict: Verdict = Verdict.KEEP
    summary: str = ""
    judge_steps: int = 0
    fallback: bool = False

    @property
    def issue_keys(self) -> List[Tuple[str, int, int]]:
        return [issue.key for issue in self.issues]

    def to_json(self) -> str:
        return self.model_dump_json()
