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
import logging
from typing import TYPE_CHECKING, Any, Callable, Dict, Iterator, List, Optional

from pydantic import BaseModel

from agentscale.exceptions import (
    AgentScaleError,
    GatewayError,
    InvalidToolSpec,
    NameCollision,
    RemoteToolError,
    SchemaViolation,
)
from agentscale.gateway.models import ToolCall, ToolSchema
from agentscale.helpers.schema import argument_violations
from agentscale.helpers.utils import canonical_json

if TYPE_CHECKING:
    from agentscale.runtime.context import ExecutionContext

LOGGER = logging.getLogger(__name__)


class ExecutorKind(str, enum.Enum):
    BUILTIN = "builtin"
    SCRIPT = "custom-script"
    MCP = "mcp"
    SUB_AGENT = "sub-agent"


class Observation(BaseModel):
    """
    What a tool returns to the model.  Errors are observations too, the model is expected to react to them.
    """

    content: str
    is_error: bool = False
    data: Any = None

    @classmethod
    def failure(cls, error: str, **fields: Any) -> "Observation":
        data = {"error": error, **fields}
        return cls(content=canonical_json(data), is_error=True, data=data)


Executor = Callable[[Dict[str, Any], "ExecutionContext"], Observation]


class ToolDescriptor:
    """
    A capability of an agent: what the model sees of it (name, description, input schema) and the executor
    running it.  The model-visible part has the same shape whatever the kind of executor.
    """

    def __init__(
        self, name: str, description: str, input_schema: Dict[str, Any], kind: ExecutorKind, executor: Executor
    ) -> None:
        if not description.strip():
            raise InvalidToolSpec(f"Tool {name} has no description, the model can not know when to use it")

        self.name = name
        self.description = description
        self.input_schema = input_schema
        self.kind = kind
        self.executor = executor

    @property
    def schema(self) -> ToolSchema:
        return ToolSchema(name=self.name, description=self.description, input_schema=self.input_schema)

    def __repr__(self) -> str:
        return f"ToolDescriptor(name={self.name}, kind={self.kind.value})"


class ToolRegistry:
    """
    The namespace of an agent: every tool and sub-agent it can call, in declaration order.
    """

    def __init__(self, descriptors: Optional[List[ToolDescriptor]] = None) -> None:
        self._tools: Dict[str, ToolDescriptor] = {}
        for descriptor in descriptors or []:
            self.add(descriptor)

    def add(self, descriptor: ToolDescriptor, *, agent: str = "") -> None:
        existing = self._tools.get(descriptor.name)
        if existing is not None:
            raise NameCollision(agent, descriptor.name, [existing.kind.value, descriptor.kind.value])
        self._tools[descriptor.name] = descriptor

    def get(self, name: str) -> Optional[ToolDescriptor]:
        return self._tools.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    def __iter__(self) -> Iterator[ToolDescriptor]:
        return iter(list(self._tools.values()))

    @property
    def names(self) -> List[str]:
        return list(self._tools)

    def schemas(self) -> List[ToolSchema]:
        return [descriptor.schema for descriptor in self._tools.values()]

    def dispatch(self, call: ToolCall, ctx: "ExecutionContext") -> Observation:
        """
        Validate the arguments of a call and execute it.  Anything going wrong on the tool side comes back
        as an error observation, only model backend failures are raised.
        """
        descriptor = self._tools.get(call.name)
        if descriptor is None:
            LOGGER.debug(f"Unknown tool {call.name!r}, available: {self.names}")
            return Observation.failure("unknown_tool", tool=call.name, available=self.names)

        violations = argument_violations(descriptor.input_schema, call.arguments)
        if violations:
            LOGGER.debug(str(SchemaViolation(call.name, violations)))
            return Observation.failure("schema_violation", tool=call.name, violations=violations)

        LOGGER.debug(f"Dispatching {call.name} ({descriptor.kind.value}) with {canonical_json(call.arguments)}")
        try:
            return descriptor.executor(call.arguments, ctx)
        except GatewayError:
            raise
        except RemoteToolError as e:
            return Observation.failure("remote_error", tool=call.name, code=e.code, message=e.message, data=e.data)
        except (AgentScaleError, OSError) as e:
            return Observation.failure("tool_error", tool=call.name, message=str(e))
