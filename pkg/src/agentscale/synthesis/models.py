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
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_MAX_NODES = 34
DEFAULT_MAX_DEPTH = 3


class WorkflowPattern(str, enum.Enum):
    SINGLE_REACT = "single-react"
    PIPELINE = "pipeline"
    MANAGER_WORKERS = "manager-workers"
    HIERARCHICAL_TREE = "hierarchical-tree"
    FIXED_WORKFLOW = "fixed-workflow"


# Shape used when the description says nothing: (nodes, depth)
PATTERN_DEFAULTS: Dict[WorkflowPattern, Tuple[int, int]] = {
    WorkflowPattern.SINGLE_REACT: (1, 1),
    WorkflowPattern.PIPELINE: (4, 2),
    WorkflowPattern.MANAGER_WORKERS: (3, 2),
    WorkflowPattern.HIERARCHICAL_TREE: (7, 3),
    WorkflowPattern.FIXED_WORKFLOW: (4, 2),
}


class SeedKind(str, enum.Enum):
    BUILTIN = "builtin"
    MCP = "mcp"
    CUSTOM = "custom"


class CapabilitySeed(BaseModel):
    """
    A capability a generated framework may use.  Mcp seeds name the server exposing them, custom seeds the
    behaviour of the script stub to synthesize.
    """

    model_config = ConfigDict(extra="forbid")

    name: str
    description: str
    input_schema: Dict[str, Any] = Field(default_factory=dict)
    kind: SeedKind = SeedKind.BUILTIN
    server: Optional[str] = None
    endpoint: str = "loopback"
    remote: Optional[str] = None
    behavior: Optional[str] = None

    @property
    def remote_name(self) -> str:
        return self.remote or self.name


class Constraints(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_nodes: int = Field(default=DEFAULT_MAX_NODES, ge=1)
    max_depth: int = Field(default=DEFAULT_MAX_DEPTH, ge=1)
    target_nodes: Optional[int] = Field(default=None, ge=1)
    target_depth: Optional[int] = Field(default=None, ge=1)


class FrameworkDescription(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    capability_seeds: List[CapabilitySeed] = Field(default_factory=list)
    constraints: Constraints = Field(default_factory=Constraints)

    @field_validator("text")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("A framework description needs some text")
        return value

    def seed(self, name: str) -> Optional[CapabilitySeed]:
        return next((s for s in self.capability_seeds if s.name == name), None)


class ActionKind(str, enum.Enum):
    TOOL = "tool"
    SUB_AGENT = "sub-agent"
    MCP = "mcp"


class ActionBinding(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: ActionKind
    target: str


class PlanRole(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    persona: str
    meta_skills: List[str] = Field(default_factory=list)
    parent: Optional[str] = None


class BuildPlan(BaseModel):
    """
    The decomposition of a framework into roles.  Roles form a tree through their parent, the skills of a
    role are realized by the actions bound to them.
    """

    model_config = ConfigDict(extra="forbid")

    pattern: WorkflowPattern
    roles: List[PlanRole]
    skill_to_actions: Dict[str, List[ActionBinding]] = Field(default_factory=dict)
    capability_seeds: List[CapabilitySeed] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    def role(self, name: str) -> Optional[PlanRole]:
        return next((r for r in self.roles if r.name == name), None)

    def children(self, name: str) -> List[PlanRole]:
        return [r for r in self.roles if r.parent == name]

    @property
    def root(self) -> PlanRole:
        return next(r for r in self.roles if r.parent is None)

    def layer(self, name: str) -> int:
        """
        1 for the root, the length of the parent chain otherwise.  Assumes the parents form a tree.
        """
        depth, role = 1, self.role(name)
        while role is not None and role.parent is not None:
            depth += 1
            role = self.role(role.parent)
        return depth

    @property
    def node_count(self) -> int:
        return len(self.roles)

    @property
    def depth(self) -> int:
        return max((self.layer(r.name) for r in self.roles), default=0)

    def seed(self, name: str) -> Optional[CapabilitySeed]:
        return next((s for s in self.capability_seeds if s.name == name), None)
