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
from typing import Dict, List, Set

from pydantic import BaseModel, ConfigDict, Field, field_validator

from agentscale.config.parser import config_digest
from agentscale.config.schema import FrameworkConfig, ToolKind


class Difficulty(str, enum.Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


class Labels(BaseModel):
    """
    The bilingual labels of a problem type, english is the primary one.
    """

    model_config = ConfigDict(extra="forbid")

    en: str
    zh: str

    @field_validator("en", "zh")
    @classmethod
    def _not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("labels can not be blank")
        return value.strip()


class PersonaProfile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    background: str
    tone: str = "neutral"
    goals: List[str] = Field(default_factory=list)

    @field_validator("background")
    @classmethod
    def _background_set(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("a persona needs a background")
        return value


class FrameworkContext(BaseModel):
    """
    What a query needs to know about the framework that will answer it.
    """

    model_config = ConfigDict(extra="forbid")

    name: str
    description: str = ""
    agents: List[str] = Field(default_factory=list)
    capabilities: List[str] = Field(default_factory=list)
    config_digest: str = ""

    @classmethod
    def from_config(cls, framework: FrameworkConfig) -> "FrameworkContext":
        capabilities: Set[str] = set()
        for agent in framework.definitions().values():
            capabilities.update(tool.name for tool in agent.tools if tool.kind != ToolKind.SUB_AGENT)
            for server in agent.mcp_servers:
                capabilities.update(server.allowed_tools or [server.name])
            capabilities.update(agent.skills)

        return cls(
            name=framework.name,
            description=framework.description,
            agents=sorted(framework.definitions()),
            capabilities=sorted(capabilities),
            config_digest=config_digest(framework),
        )


class QueryConditioning(BaseModel):
    """
    The four variables a query is synthesized from.
    """

    model_config = ConfigDict(extra="forbid")

    persona: PersonaProfile
    problem_type: str
    problem_labels: Labels
    framework_context: FrameworkContext
    difficulty: Difficulty


class StageRecord(BaseModel):
    stage: str
    input_digest: str
    output_digest: str


class SynthesizedQuery(BaseModel):
    text: str
    conditioning: QueryConditioning
    stage_trace: List[StageRecord] = Field(default_factory=list)
    grounded: bool = False
    fuzzified: bool = False
    passages: List[str] = Field(default_factory=list)

    @property
    def stages(self) -> List[str]:
        return [record.stage for record in self.stage_trace]

    def to_record(self) -> Dict[str, object]:
        return self.model_dump(mode="json")
