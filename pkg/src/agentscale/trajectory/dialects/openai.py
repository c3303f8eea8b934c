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

import json
from typing import Any, Dict, List, Optional, Tuple

from agentscale.gateway.models import Message, Role, ToolCall
from agentscale.trajectory.dialects.base import Dialect, dump_arguments, link_tool_messages, load_arguments, syntax_error


def message_to_openai(message: Message) -> Dict[str, Any]:
    data: Dict[str, Any] = {"role": message.role.value, "content": message.content}
    if message.tool_calls:
        data["tool_calls"] = [
            {"id": call.id, "type": "function", "function": {"name": call.name, "arguments": dump_arguments(call.arguments)}}
            for call in message.tool_calls
        ]
    if message.role == Role.TOOL:
        data["tool_call_id"] = message.tool_call_id
        if message.name:
            data["name"] = message.name
    return data


def message_from_openai(data: Any, offset: int, document: str) -> Message:
    if not isinstance(data, dict) or data.get("role") not in {r.value for r in Role}:
        raise syntax_error(document, offset, "Every message must be an object with a known role")

    calls = []
    for raw in data.get("tool_calls") or []:
        function = raw.get("function", {}) if isinstance(raw, dict) else {}
        if not isinstance(function.get("name"), str):
            raise syntax_error(document, offset, "A tool call must have a function name")
        arguments = load_arguments(function.get("arguments", {}), offset, document)
        calls.append(ToolCall(id=raw.get("id") or "", name=function["name"], arguments=arguments))

    return Message(
        role=Role(data["role"]),
        content=data.get("content") or "",
        tool_calls=calls,
        tool_call_id=data.get("tool_call_id") or ("pending" if data["role"] == Role.TOOL.value else None),
        name=data.get("name"),
    )


class OpenAIJsonDialect(Dialect):
    """
    Chat-completions messages, one json object per context on a single line.  Call arguments are written as
    embedded json strings, and accepted as strings or objects when parsing.
    """

    id = "openai-json"

    def render_messages(self, messages: List[Message]) -> str:
        return json.dumps({"messages": [message_to_openai(m) for m in messages]}, ensure_ascii=False)

    def parse_messages(self, text: str, offset: int = 0, document: Optional[str] = None) -> List[Message]:
        document = document if document is not None else text
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise syntax_error(document, offset + e.pos, f"Invalid json: {e.msg}")

        if isinstance(data, dict):
            data = data.get("messages")
        if not isinstance(data, list):
            raise syntax_error(document, offset, "Expected a list of messages")

        messages = [message_from_openai(item, offset, document) for item in data]
        if any(m.tool_call_id == "pending" for m in messages):
            return link_tool_messages(messages, reassign=True)
        return messages

    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        # Native tool calls travel outside of the content in this dialect
        return text, []
