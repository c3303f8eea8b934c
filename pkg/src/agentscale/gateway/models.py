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

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Role(str, enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"
    TOOL = "tool"


class FinishReason(str, enum.Enum):
    STOP = "stop"
    TOOL_CALLS = "tool_calls"
    LENGTH = "length"


class ToolCall(BaseModel):
    id: str = ""
    name: str
    arguments: Any = Field(default_factory=dict)


class Message(BaseModel):
    role: Role
    content: str = ""
    tool_calls: List[ToolCall] = Field(default_factory=list)
    tool_call_id: Optional[str] = None
    name: Optional[str] = None  # The tool name, on tool messages

    @model_validator(mode="after")
    def _check_role_fields(self) -> "Message":
        if self.role == Role.TOOL and not self.tool_call_id:
            raise ValueError("A tool message must carry the id of the call it answers")
        if self.tool_calls and self.role != Role.ASSISTANT:
            raise ValueError("Only assistant messages can carry tool calls")
        return self


class ToolSchema(BaseModel):
    """
    What the model sees of a tool, whatever executes it behind the scene.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    input_schema: Dict[str, Any] = Field(default_factory=dict)

    def to_openai(self) -> Dict[str, Any]:
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": self.input_schema or {"type": "object", "properties": {}},
            },
        }


class SamplingParams(BaseModel):
    temperature: float = 0.0
    seed: int = 0
    max_tokens: Optional[int] = None


class ModelRequest(BaseModel):
    messages: List[Message]
    available_tools: List[ToolSchema] = Field(default_factory=list)
    dialect_hint: Optional[str] = None
    sampling: SamplingParams = Field(default_factory=SamplingParams)
    run_id: str = ""
    context_path: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check_messages(self) -> "ModelRequest":
        if not self.messages:
            raise ValueError("A model request needs at least one message")
        if self.messages[0].role != Role.SYSTEM:
            raise ValueError("The first message of a model request must be the system message")
        return self

    @property
    def step(self) -> int:
        """
        The index of the turn being requested within its context.
        """
        return sum(1 for m in self.messages if m.role == Role.ASSISTANT)

    @property
    def path(self) -> str:
        return "/".join(self.context_path)


class ModelTurn(BaseModel):
    content: str = ""
    tool_calls: List[ToolCall] = Field(default_factory=list)
    finish_reason: FinishReason = FinishReason.STOP

    @model_validator(mode="after")
    def _check_finish_reason(self) -> "ModelTurn":
        if (self.finish_reason == FinishReason.TOOL_CALLS) != bool(self.tool_calls):
            raise ValueError("finish_reason is tool_calls if and only if the turn carries tool calls")
        return self

    @classmethod
    def answer(cls, content: str) -> "ModelTurn":
        return cls(content=content, finish_reason=FinishReason.STOP)

    @classmethod
    def call(cls, content: str, *calls: ToolCall) -> "ModelTurn":
        return cls(content=content, tool_calls=list(calls), finish_reason=FinishReason.TOOL_CALLS)
