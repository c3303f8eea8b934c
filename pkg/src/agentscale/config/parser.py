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

import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, Union

import pydantic
import yaml
from pydantic import BaseModel

from agentscale.config.schema import (
    FINAL_ANSWER_TOOL,
    SCHEMA_VERSION,
    AgentRef,
    AgentSpec,
    FrameworkConfig,
    McpServerSpec,
    TerminationMode,
    TerminationPolicy,
    ToolKind,
    ToolRef,
)
from agentscale.exceptions import CycleError, NameCollision, SchemaError
from agentscale.helpers.schema import schema_problems
from agentscale.helpers.utils import digest, load_document

LOGGER = logging.getLogger(__name__)

SOFT_MAX_DEPTH = 3
HEADER_KEY = "nexau_schema"
IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")

# Nested model of each field that holds models, used by the lenient pre-pass
NESTED_MODELS: Dict[Type[BaseModel], Dict[str, Type[BaseModel]]] = {
    FrameworkConfig: {"root_agent": AgentSpec, "agents": AgentSpec},
    AgentSpec: {
        "tools": ToolRef,
        "sub_agents": AgentSpec,
        "mcp_servers": McpServerSpec,
        "termination": TerminationPolicy,
    },
}


class Finding(BaseModel):
    path: str
    rule: str
    message: str


class ValidationReport(BaseModel):
    findings: List[Finding] = []

    @property
    def ok(self) -> bool:
        return not self.findings

    def by_rule(self, rule: str) -> List[Finding]:
        return [f for f in self.findings if f.rule == rule]


def _strip_unknown(data: Any, model: Type[BaseModel], path: str) -> Any:
    """
    Drop, with a warning, every key of data that the model doesn't know about.  Recurse in nested models.
    """
    if isinstance(data, list):
        return [_strip_unknown(item, model, f"{path}[{i}]") for i, item in enumerate(data)]

    if not isinstance(data, dict):
        return data

    if model is AgentSpec and set(data.keys()) == {"ref"}:
        # By-name reference written as a mapping
        return data

    result: Dict[str, Any] = {}
    nested = NESTED_MODELS.get(model, {})
    for key, value in data.items():
        if key not in model.model_fields:
            LOGGER.warning(f"Dropping unknown key {path}.{key}" if path else f"Dropping unknown key {key}")
            continue

        result[key] = _strip_unknown(value, nested[key], f"{path}.{key}" if path else key) if key in nested else value

    return result


def _error_path(loc: Sequence[Union[str, int]]) -> str:
    """
    Convert a pydantic error location into the dotted path used in findings, skipping the union
    member tags pydantic adds for sub_agents entries.
    """
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        elif part in ("AgentSpec", "AgentRef"):
            continue
        else:
            path += f".{part}" if path else str(part)
    return path


def _namespace(agent: AgentSpec, definitions: Dict[str, AgentSpec]) -> List[Tuple[str, str]]:
    """
    All the names an agent can call, with the kind of callable they designate.
    """
    names: List[Tuple[str, str]] = [(tool.name, tool.kind.value) for tool in agent.tools]
    for entry in agent.sub_agents:
        names.append((entry.name if isinstance(entry, AgentSpec) else entry.ref, "sub-agent"))

    if agent.termination.mode == TerminationMode.FINAL_ANSWER_TOOL:
        explicit = any(t.name == FINAL_ANSWER_TOOL and t.kind == ToolKind.BUILTIN for t in agent.tools)
        if not explicit:
            names.append((FINAL_ANSWER_TOOL, "builtin"))

    return names


def _find_cycle(framework: FrameworkConfig) -> Optional[List[str]]:
    """
    Depth first search over the agent reference graph, return the first cycle found as a list of names
    starting and ending with the same agent.
    """
    definitions = framework.definitions()
    edges: Dict[str, List[str]] = {name: [] for name in definitions}
    for _, agent in framework.iter_definitions():
        targets = edges.setdefault(agent.name, [])
        for entry in agent.sub_agents:
            targets.append(entry.name if isinstance(entry, AgentSpec) else entry.ref)
        for tool in agent.tools:
            if tool.kind == ToolKind.SUB_AGENT:
                targets.append(tool.source or tool.name)

    WHITE, GREY, BLACK = 0, 1, 2
    color = {name: WHITE for name in edges}
    stack: List[str] = []

    def visit(name: str) -> Optional[List[str]]:
        color[name] = GREY
        stack.append(name)
        for target in edges.get(name, []):
            if target not in color:
                # Unresolved, reported by another rule
                continue
            if color[target] == GREY:
                return stack[stack.index(target) :] + [target]
            if color[target] == WHITE:
                cycle = visit(target)
                if cycle is not None:
                    return cycle
        stack.pop()
        color[name] = BLACK
        return None

    for name in [framework.root_agent.name] + sorted(edges):
        if color.get(name) == WHITE:
            cycle = visit(name)
            if cycle is not None:
                return cycle
    return None


def validate_framework(framework: FrameworkConfig) -> ValidationReport:
    """
    Check every invariant of a parsed framework.  This never raises, all problems are returned as findings.
    """
    findings: List[Finding] = []

    def add(path: str, rule: str, message: str) -> None:
        findings.append(Finding(path=path, rule=rule, message=message))

    if not IDENTIFIER.match(framework.name):
        add("name", "identifier", f"{framework.name!r} is not a valid identifier")

    definitions = framework.definitions()
    seen_names: Dict[str, str] = {}
    for path, agent in framework.iter_definitions():
        if not IDENTIFIER.match(agent.name):
            add(f"{path}.name", "identifier", f"{agent.name!r} is not a valid identifier")

        if agent.name in seen_names:
            add(path, "agent_name_unique", f"Agent {agent.name} is already defined at {seen_names[agent.name]}")
        else:
            seen_names[agent.name] = path

        if agent.max_iterations < 1:
            add(f"{path}.max_iterations", "max_iterations_positive", f"max_iterations must be >= 1, got {agent.max_iterations}")

        for problem in schema_problems(agent.input_schema):
            add(f"{path}.input_schema", "input_schema_typed", problem)

        for i, tool in enumerate(agent.tools):
            tool_path = f"{path}.tools[{i}]"
            if not IDENTIFIER.match(tool.name):
                add(f"{tool_path}.name", "identifier", f"{tool.name!r} is not a valid identifier")
            for problem in schema_problems(tool.input_schema):
                add(f"{tool_path}.input_schema", "input_schema_typed", problem)
            if tool.kind == ToolKind.SUB_AGENT and (tool.source or tool.name) not in definitions:
                add(f"{tool_path}.source", "sub_agent_tool_resolves", f"No agent named {tool.source or tool.name!r}")

        for i, entry in enumerate(agent.sub_agents):
            if isinstance(entry, AgentRef) and entry.ref not in definitions:
                add(f"{path}.sub_agents[{i}]", "ref_resolves", f"No agent named {entry.ref!r}")

        server_names: Dict[str, int] = {}
        for i, server in enumerate(agent.mcp_servers):
            server_path = f"{path}.mcp_servers[{i}]"
            if not server.endpoint.strip():
                add(f"{server_path}.endpoint", "mcp_endpoint_nonempty", "The endpoint of an mcp server can not be empty")
            if not IDENTIFIER.match(server.name):
                add(f"{server_path}.name", "identifier", f"{server.name!r} is not a valid identifier")
            if server.name in server_names:
                add(server_path, "mcp_name_unique", f"Mcp server {server.name} is already declared by {agent.name}")
            server_names.setdefault(server.name, i)

        kinds: Dict[str, List[str]] = {}
        for name, kind in _namespace(agent, definitions):
            kinds.setdefault(name, []).append(kind)
        for name, clashing in kinds.items():
            if len(clashing) > 1:
                add(path, "namespace_unique", f"{name!r} is declared {len(clashing)} times ({', '.join(clashing)})")

    cycle = _find_cycle(framework)
    if cycle is not None:
        add("root_agent", "acyclic", "Sub-agent cycle: " + "→".join(cycle))

    return ValidationReport(findings=findings)


def parse_framework(
    document: str,
    *,
    lenient: bool = False,
    base_dir: Optional[Path] = None,
) -> FrameworkConfig:
    """
    Parse and validate a framework document.

    :param document: The yaml text of the document
    :param lenient: If true, unknown keys are dropped with a warning instead of being rejected
    :param base_dir: The directory relative paths of the document are resolved against, only used for logging
    :raises ConfigSyntaxError: The document is not valid yaml
    :raises SchemaError: The document doesn't match the schema, or breaks one of its invariants
    :raises CycleError: An agent is its own transitive sub-agent
    :raises NameCollision: Two callables of an agent share a name
    """
    data = load_document(document, HEADER_KEY, SCHEMA_VERSION, "framework")

    if lenient:
        data = _strip_unknown(data, FrameworkConfig, "")

    try:
        framework = FrameworkConfig.model_validate(data)
    except pydantic.ValidationError as e:
        errors = e.errors()
        findings = [
            Finding(path=_error_path(err["loc"]), rule="schema", message=err["msg"]) for err in errors
        ]
        raise SchemaError(findings[0].message, path=findings[0].path, findings=findings)

    report = validate_framework(framework)
    if not report.ok:
        cycles = report.by_rule("acyclic")
        if cycles:
            raise CycleError(_find_cycle(framework) or [])

        collisions = report.by_rule("namespace_unique")
        if collisions:
            agent = _agent_at(framework, collisions[0].path)
            kinds: Dict[str, List[str]] = {}
            for name, kind in _namespace(agent, framework.definitions()):
                kinds.setdefault(name, []).append(kind)
            name, clashing = next((n, k) for n, k in kinds.items() if len(k) > 1)
            raise NameCollision(agent.name, name, clashing)

        first = report.findings[0]
        raise SchemaError(first.message, path=first.path, findings=report.findings)

    if framework.depth > SOFT_MAX_DEPTH:
        LOGGER.warning(
            f"Framework {framework.name} is {framework.depth} layers deep, agent hierarchies are usually "
            f"at most {SOFT_MAX_DEPTH} layers deep"
        )

    LOGGER.debug(
        f"Parsed framework {framework.name} ({framework.node_count} nodes, depth {framework.depth})"
        + (f" from {base_dir}" if base_dir is not None else "")
    )
    return framework


def _agent_at(framework: FrameworkConfig, path: str) -> AgentSpec:
    for agent_path, agent in framework.iter_definitions():
        if agent_path == path:
            return agent
    raise LookupError(f"No agent at path {path}")


def load_framework(path: Path, *, lenient: bool = False) -> FrameworkConfig:
    """
    Read and parse a framework document from a file.
    """
    return parse_framework(path.read_text(encoding="utf-8"), lenient=lenient, base_dir=path.parent)


def framework_to_dict(framework: FrameworkConfig) -> Dict[str, Any]:
    data: Dict[str, Any] = {HEADER_KEY: SCHEMA_VERSION}
    data.update(framework.model_dump(mode="json", exclude_defaults=True))
    return data


def serialize_framework(framework: FrameworkConfig) -> str:
    """
    Serialize a framework into a yaml document that parses back into an equal framework.  Fields
    holding their default value are omitted.
    """
    return yaml.safe_dump(framework_to_dict(framework), sort_keys=False, allow_unicode=True, default_flow_style=False)


def config_digest(framework: FrameworkConfig) -> str:
    return digest(serialize_framework(framework))
