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
from abc import abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

from agentscale.exceptions import DialectSyntaxError, UnrepresentableFeature
from agentscale.gateway.models import Message, Role, ToolCall

CHATML_START = "<|im_start|>"
CHATML_END = "<|im_end|>"
CONTEXT_MARKER = "### context:"


def syntax_error(document: str, offset: int, message: str) -> DialectSyntaxError:
    """
    Build a syntax error pointing at an absolute offset of the parsed document.
    """
    return DialectSyntaxError(message, line=document.count("\n", 0, offset) + 1, offset=offset)


def dump_call(call: ToolCall) -> str:
    return json.dumps({"name": call.name, "arguments": call.arguments}, separators=(",", ":"), ensure_ascii=False)


def dump_arguments(arguments: Any) -> str:
    return json.dumps(arguments, separators=(",", ":"), ensure_ascii=False)


def load_call(text: str, offset: int, document: str) -> ToolCall:
    """
    Parse a {"name": ..., "arguments": ...} json object.  Arguments given as an embedded json string
    are decoded.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise syntax_error(document, offset + e.pos, f"Invalid tool call payload: {e.msg}")

    if not isinstance(data, dict) or not isinstance(data.get("name"), str):
        raise syntax_error(document, offset, "A tool call payload must be an object with a name")

    return ToolCall(name=data["name"], arguments=load_arguments(data.get("arguments", {}), offset, document))


def load_arguments(arguments: Any, offset: int, document: str) -> Any:
    if isinstance(arguments, str):
        try:
            return json.loads(arguments) if arguments.strip() else {}
        except json.JSONDecodeError as e:
            raise syntax_error(document, offset, f"Invalid tool call arguments: {e.msg}")
    return arguments


def find_blocks(text: str, opening: str, closing: str, offset: int, document: str) -> Tuple[str, List[Tuple[str, int]]]:
    """
    Split text into the text found outside of the opening/closing tag pairs, and the content of each pair
    with its absolute offset.

    :raises DialectSyntaxError: On a closing tag without opening tag, a nested opening tag, or an
        opening tag that is never closed.  The error points at the offending tag.
    """
    outside: List[str] = []
    blocks: List[Tuple[str, int]] = []
    position = 0
    while True:
        open_at = text.find(opening, position)
        close_at = text.find(closing, position)
        if close_at != -1 and (open_at == -1 or close_at < open_at):
            raise syntax_error(document, offset + close_at, f"Unexpected {closing}")

        if open_at == -1:
            outside.append(text[position:])
            break

        outside.append(text[position:open_at])
        start = open_at + len(opening)
        end = text.find(closing, start)
        if end == -1:
            raise syntax_error(document, offset + open_at, f"Unterminated {opening}")

        nested = text.find(opening, start)
        if nested != -1 and nested < end:
            raise syntax_error(document, offset + nested, f"Nested {opening}")

        blocks.append((text[start:end], offset + start))
        position = end + len(closing)

    return "".join(outside), blocks


def link_tool_messages(messages: List[Message], *, reassign: bool = False) -> List[Message]:
    """
    Give ids to the calls of parsed messages that had none, and attach every tool message to the oldest
    unanswered call of its context.

    :param reassign: Ignore the call ids tool messages already carry
    """
    counter = 0
    pending: List[ToolCall] = []
    linked: List[Message] = []
    for message in messages:
        if message.role == Role.ASSISTANT:
            calls = []
            for call in message.tool_calls:
                counter += 1
                call = call.model_copy(update={"id": call.id or f"call_{counter}"})
                calls.append(call)
                pending.append(call)
            linked.append(message.model_copy(update={"tool_calls": calls}))
        elif message.role == Role.TOOL:
            answered = pending.pop(0) if pending else None
            fallback = answered.id if answered else f"call_orphan_{len(linked)}"
            tool_call_id = (None if reassign else message.tool_call_id) or fallback
            name = message.name or (answered.name if answered else None)
            linked.append(message.model_copy(update={"tool_call_id": tool_call_id, "name": name}))
        else:
            linked.append(message)
    return linked


class Dialect:
    """
    Parent class of all tool-call dialects.  A dialect renders the messages of one context into text, and
    parses such text back into messages.  Rendering fails loudly, with UnrepresentableFeature, on anything
    the grammar can not express.
    """

    id = "abstract"

    # Marker strings that can not appear in any message content
    reserved: Tuple[str, ...] = ()

    supports_parallel_calls = True

    def check_content(self, content: str, where: str) -> None:
        for marker in self.reserved:
            if marker in content:
                raise UnrepresentableFeature(f"The {where} content contains {marker!r}, reserved by the {self.id} dialect")

    def check_calls(self, calls: Sequence[ToolCall]) -> None:
        if len(calls) > 1 and not self.supports_parallel_calls:
            raise UnrepresentableFeature(f"The {self.id} dialect can only express one tool call per turn, got {len(calls)}")

    def check_call_payload(self, call: ToolCall) -> None:
        self.check_content(dump_call(call), f"{call.name} call")

    @abstractmethod
    def render_messages(self, messages: List[Message]) -> str:
        """
        Render the messages of one context.
        """

    @abstractmethod
    def parse_messages(self, text: str, offset: int = 0, document: Optional[str] = None) -> List[Message]:
        """
        Parse the rendering of one context.

        :param offset: The offset of text in the document it was taken from, for error reporting
        :param document: The complete document, defaults to text
        """

    @abstractmethod
    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        """
        Split the text of one assistant turn into its free text and its tool calls.
        """


class ChatMLDialect(Dialect):
    """
    Base for the dialects framing every message in <|im_start|>role ... <|im_end|> blocks.  Inheriting
    classes only define how assistant turns and tool results are written inside a frame.
    """

    frame_reserved: Tuple[str, ...] = (CHATML_START, CHATML_END, CONTEXT_MARKER)

    @property
    def all_reserved(self) -> Tuple[str, ...]:
        return self.frame_reserved + self.reserved

    def check_content(self, content: str, where: str) -> None:
        for marker in self.all_reserved:
            if marker in content:
                raise UnrepresentableFeature(f"The {where} content contains {marker!r}, reserved by the {self.id} dialect")

    @abstractmethod
    def encode_assistant(self, content: str, calls: List[ToolCall]) -> str:
        pass

    @abstractmethod
    def encode_tool(self, message: Message) -> str:
        pass

    @abstractmethod
    def decode_tool(self, text: str, offset: int, document: str) -> Tuple[str, Optional[str]]:
        """
        Parse a tool frame body into the result content and, if the dialect writes it, the tool name.
        """

    def render_messages(self, messages: List[Message]) -> str:
        frames: List[str] = []
        for message in messages:
            if message.role == Role.ASSISTANT:
                self.check_calls(message.tool_calls)
                for call in message.tool_calls:
                    self.check_call_payload(call)
                body = self.encode_assistant(message.content, message.tool_calls)
            elif message.role == Role.TOOL:
                self.check_content(message.content, "tool result")
                body = self.encode_tool(message)
            else:
                self.check_content(message.content, f"{message.role.value} message")
                body = message.content
            frames.append(f"{CHATML_START}{message.role.value}\n{body}\n{CHATML_END}")
        return "\n".join(frames)

    def parse_messages(self, text: str, offset: int = 0, document: Optional[str] = None) -> List[Message]:
        document = document if document is not None else text
        messages: List[Message] = []
        position = 0
        while True:
            while position < len(text) and text[position].isspace():
                position += 1
            if position >= len(text):
                break

            if not text.startswith(CHATML_START, position):
                raise syntax_error(document, offset + position, f"Expected {CHATML_START}")

            role_start = position + len(CHATML_START)
            role_end = text.find("\n", role_start)
            if role_end == -1:
                raise syntax_error(document, offset + position, "Unterminated message frame")

            role_name = text[role_start:role_end].strip()
            try:
                role = Role(role_name)
            except ValueError:
                raise syntax_error(document, offset + role_start, f"Unknown role {role_name!r}")

            close_at = text.find("\n" + CHATML_END, role_end)
            if close_at == -1:
                raise syntax_error(document, offset + position, f"Unterminated {CHATML_START} frame")

            body = text[role_end + 1 : close_at] if close_at > role_end else ""
            body_offset = offset + role_end + 1
            if role == Role.ASSISTANT:
                content, calls = self.decode_assistant(body, body_offset, document)
                messages.append(Message(role=role, content=content, tool_calls=calls))
            elif role == Role.TOOL:
                content, name = self.decode_tool(body, body_offset, document)
                messages.append(Message(role=role, content=content, tool_call_id="pending", name=name))
            else:
                messages.append(Message(role=role, content=body))

            position = close_at + 1 + len(CHATML_END)

        # Tool messages get their real call id from the calls they answer
        return link_tool_messages(messages, reassign=True)
