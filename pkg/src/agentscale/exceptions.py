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

from typing import Any, Dict, List, Optional, Sequence


class AgentScaleError(Exception):
    """
    Base class for every error raised by this package.
    """


class ConfigError(AgentScaleError):
    pass


class ConfigSyntaxError(ConfigError):
    """
    The document is not well-formed YAML.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> None:
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    """
    The document does not match the configuration schema, or it breaks one of its invariants.

    :param path: The dotted path of the first offending node
    :param findings: All the findings that caused the rejection, if known
    """

    def __init__(self, message: str, path: str = "", findings: Optional[Sequence[Any]] = None) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.findings: List[Any] = list(findings or [])


class CycleError(ConfigError):
    def __init__(self, cycle: Sequence[str]) -> None:
        super().__init__("Sub-agent cycle detected: " + "→".join(cycle))
        self.cycle = list(cycle)


class NameCollision(ConfigError):
    def __init__(self, agent: str, name: str, kinds: Sequence[str]) -> None:
        super().__init__(f"Agent {agent} declares the name {name!r} more than once ({', '.join(kinds)})")
        self.agent = agent
        self.name = name
        self.kinds = list(kinds)


class UnresolvedRef(ConfigError):
    pass


class GatewayError(AgentScaleError):
    """
    The model backend failed to produce a turn.
    """


class ScriptExhausted(GatewayError):
    pass


class TransportError(GatewayError):
    pass


class MalformedResponse(GatewayError):
    pass


class ToolError(AgentScaleError):
    """
    A tool failed while executing.  The runtime turns it into an error observation.
    """


class SchemaViolation(ToolError):
    def __init__(self, tool: str, violations: List[Dict[str, str]]) -> None:
        fields = ", ".join(v["field"] for v in violations)
        super().__init__(f"Arguments of {tool} do not match its input schema ({fields})")
        self.tool = tool
        self.violations = violations


class SkillLoadError(AgentScaleError):
    pass


class RecorderClosed(AgentScaleError):
    pass


class McpError(AgentScaleError):
    pass


class McpTransportError(McpError, TransportError):
    pass


class ProtocolError(McpError):
    pass


class SessionStateError(McpError):
    """
    An operation was attempted in a session state where it is not legal.
    """


class RemoteToolError(McpError):
    def __init__(self, code: int, message: str, data: Any = None) -> None:
        super().__init__(f"Remote tool error {code}: {message}")
        self.code = code
        self.message = message
        self.data = data


class DialectError(AgentScaleError):
    pass


class UnrepresentableFeature(DialectError):
    pass


class DialectSyntaxError(DialectError):
    def __init__(self, message: str, line: int, offset: int) -> None:
        super().__init__(f"{message} (line {line}, offset {offset})")
        self.line = line
        self.offset = offset


class MixedDialectError(DialectError):
    pass


class PlanRejected(AgentScaleError):
    def __init__(self, message: str, problems: Optional[Sequence[str]] = None) -> None:
        super().__init__(message)
        self.problems = list(problems or [])


class UnboundSkill(AgentScaleError):
    pass


class InvalidToolSpec(AgentScaleError):
    pass


class StubGenerationFailed(AgentScaleError):
    pass


class ExpansionRejected(AgentScaleError):
    pass


class StageFailure(AgentScaleError):
    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"Stage {stage} failed: {message}")
        self.stage = stage


class JudgeOutputUnparseable(AgentScaleError):
    pass
