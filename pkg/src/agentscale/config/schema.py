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
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

SCHEMA_VERSION = 1
DEFAULT_MAX_ITERATIONS = 150
FINAL_ANSWER_TOOL = "final_answer"


def default_delegation_schema() -> Dict[str, Any]:
    return {
        "type": "object",
        "properties": {"task": {"type": "string", "description": "The task to hand over to the sub-agent"}},
        "required": ["task"],
    }


class ToolKind(str, enum.Enum):
    BUILTIN = "builtin"
    CUSTOM_SCRIPT = "custom-script"
    MCP = "mcp"
    SUB_AGENT = "sub-agent"


class McpTransportKind(str, enum.Enum):
    STDIO = "stdio"
    HTTP = "http"


class TerminationMode(str, enum.Enum):
    FINAL_ANSWER_TOOL = "final-answer-tool"
    NO_TOOL_CALL = "no-tool-call"
    MAX_ITERATIONS_ONLY = "max-iterations-only"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ToolRef(StrictModel):
    """
    A callable declared on an agent.  The source is a locator whose meaning depends on the kind:
     - builtin: the builtin tool name (defaults to the tool name)
     - custom-script: the script path, relative to the config file
     - mcp: "<server>/<remote tool name>"
     - sub-agent: the name of the agent to delegate to
    """

    name: str
    kind: ToolKind
    description: str = ""
    input_schema: Dict[str, Any] = Field(default_factory=dict)
    source: str = ""


class McpServerSpec(StrictModel):
    name: str
    transport: McpTransportKind = McpTransportKind.STDIO
    endpoint: str
    allowed_tools: Optional[List[str]] = None


class TerminationPolicy(StrictModel):
    mode: TerminationMode = TerminationMode.NO_TOOL_CALL


class AgentRef(StrictModel):
    """
    By-name reference to an agent defined elsewhere in the same document.  Written as a plain string.
    """

    ref: str


class AgentSpec(StrictModel):
    name: str
    system_prompt: str
    model: str
    description: str = ""
    tools: List[ToolRef] = Field(default_factory=list)
    sub_agents: List[Union["AgentSpec", AgentRef]] = Field(default_factory=list)
    skills: List[str] = Field(default_factory=list)
    mcp_servers: List[McpServerSpec] = Field(default_factory=list)
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    termination: TerminationPolicy = Field(default_factory=TerminationPolicy)
    input_schema: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("sub_agents", mode="before")
    @classmethod
    def _refs_from_strings(cls, value: Any) -> Any:
        if not isinstance(value, list):
            return value
        return [{"ref": item} if isinstance(item, str) else item for item in value]

    @field_serializer("sub_agents", mode="wrap")
    def _refs_to_strings(self, value: List[Union["AgentSpec", AgentRef]], handler: Any) -> List[Any]:
        dumped = handler(value)
        return [item.ref if isinstance(item, AgentRef) else raw for item, raw in zip(value, dumped)]

    @property
    def delegation_schema(self) -> Dict[str, Any]:
        """
        The input schema the parent sees when this agent is exposed as a tool.
        """
        return self.input_schema or default_delegation_schema()

    @property
    def summary(self) -> str:
        """
        The model-visible description of this agent when it is used as a sub-agent.
        """
        if self.description:
            return self.description
        first_line = self.system_prompt.strip().splitlines()[0] if self.system_prompt.strip() else ""
        return f"Delegate a task to the {self.name} agent. {first_line}".strip()


AgentSpec.model_rebuild()


class FrameworkConfig(StrictModel):
    """
    A framework is a tree of agents rooted at root_agent.  Agents listed in `agents` are only part of the
    tree when something references them by name.
    """

    name: str
    description: str = ""
    metadata: Dict[str, Any] = Field(default_factory=dict)
    root_agent: AgentSpec
    agents: List[AgentSpec] = Field(default_factory=list)

    def iter_definitions(self) -> Iterator[Tuple[str, AgentSpec]]:
        """
        Walk every agent definition written in the document, with its path, without following references.
        """

        def walk(path: str, agent: AgentSpec) -> Iterator[Tuple[str, AgentSpec]]:
            yield path, agent
            for i, child in enumerate(agent.sub_agents):
                if isinstance(child, AgentSpec):
                    yield from walk(f"{path}.sub_agents[{i}]", child)

        yield from walk("root_agent", self.root_agent)
        for i, agent in enumerate(self.agents):
            yield from walk(f"agents[{i}]", agent)

    def definitions(self) -> Dict[str, AgentSpec]:
        """
        All named definitions of the document, the first definition wins when a name is duplicated.
        """
        result: Dict[str, AgentSpec] = {}
        for _, agent in self.iter_definitions():
            result.setdefault(agent.name, agent)
        return result

    def resolve(self, entry: Union[AgentSpec, AgentRef, str]) -> Optional[AgentSpec]:
        if isinstance(entry, AgentSpec):
            return entry
        name = entry.ref if isinstance(entry, AgentRef) else entry
        return self.definitions().get(name)

    def children(self, agent: AgentSpec) -> List[Tuple[str, AgentSpec]]:
        """
        The callables of an agent that are sub-agents, as (callable name, resolved agent) pairs, in declaration
        order: sub_agents first, then tools of kind sub-agent.  Unresolved references are skipped.
        """
        result: List[Tuple[str, AgentSpec]] = []
        for entry in agent.sub_agents:
            child = self.resolve(entry)
            if child is not None:
                result.append((child.name, child))

        for tool in agent.tools:
            if tool.kind == ToolKind.SUB_AGENT:
                child = self.resolve(tool.source or tool.name)
                if child is not None:
                    result.append((tool.name, child))

        return result

    def iter_nodes(self) -> Iterator[Tuple[Tuple[str, ...], AgentSpec]]:
        """
        Walk the expanded agent tree: every reference is instantiated.  Edges closing a cycle are not followed,
        such a config is rejected by the validation anyway.
        """

        def walk(
            path: Tuple[str, ...], agent: AgentSpec, stack: Tuple[int, ...]
        ) -> Iterator[Tuple[Tuple[str, ...], AgentSpec]]:
            yield path, agent
            for _, child in self.children(agent):
                if id(child) in stack:
                    continue
                yield from walk(path + (child.name,), child, stack + (id(child),))

        yield from walk((self.root_agent.name,), self.root_agent, (id(self.root_agent),))

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    @property
    def depth(self) -> int:
        return max(len(path) for path, _ in self.iter_nodes())
