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
import re
from typing import List, Optional, Tuple

from agentscale.exceptions import UnrepresentableFeature
from agentscale.gateway.models import Message, Role, ToolCall
from agentscale.trajectory.dialects.base import (
    ChatMLDialect,
    Dialect,
    dump_arguments,
    dump_call,
    find_blocks,
    link_tool_messages,
    load_arguments,
    load_call,
    syntax_error,
)


def iter_lines(text: str, offset: int) -> List[Tuple[str, int]]:
    """
    The lines of text, without their line break, with their absolute offset.
    """
    lines: List[Tuple[str, int]] = []
    position = 0
    for line in text.split("\n"):
        lines.append((line, offset + position))
        position += len(line) + 1
    return lines


class BracketFnDialect(ChatMLDialect):
    """
    Each call is written on its own line as [fn(name="...", args={...})] after the free text.
    """

    id = "bracket-fn"
    reserved = ()

    CALL_LINE = re.compile(r'^\[fn\(name=("(?:[^"\\]|\\.)*"), args=(.*)\)\]\s*$')

    def encode_assistant(self, content: str, calls: List[ToolCall]) -> str:
        self.check_content(content, "assistant")
        if any(line.startswith("[fn(") for line in content.split("\n")):
            raise UnrepresentableFeature(
                f"The assistant content has a line starting with '[fn(', reserved by the {self.id} dialect"
            )

        parts = [content] if content else []
        parts.extend(f"[fn(name={json.dumps(call.name)}, args={dump_arguments(call.arguments)})]" for call in calls)
        return "\n".join(parts)

    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        document = document if document is not None else text
        content: List[str] = []
        calls: List[ToolCall] = []
        for line, line_offset in iter_lines(text, offset):
            if not line.startswith("[fn("):
                content.append(line)
                continue

            match = self.CALL_LINE.match(line)
            if match is None:
                raise syntax_error(document, line_offset, "Malformed [fn(...)] call")
            name = json.loads(match.group(1))
            calls.append(ToolCall(name=name, arguments=load_arguments(match.group(2), line_offset + match.start(2), document)))

        return "\n".join(content).strip(), calls

    def encode_tool(self, message: Message) -> str:
        return message.content

    def decode_tool(self, text: str, offset: int, document: str) -> Tuple[str, Optional[str]]:
        return text, None


class MarkdownJsonDialect(ChatMLDialect):
    """
    Calls are json objects in ```tool_call fenced blocks, results come back in ```tool_result blocks.
    """

    id = "markdown-json"
    reserved = ("```",)

    def encode_assistant(self, content: str, calls: List[ToolCall]) -> str:
        self.check_content(content, "assistant")
        parts = [content] if content else []
        parts.extend(f"```tool_call\n{dump_call(call)}\n```" for call in calls)
        return "\n".join(parts)

    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        document = document if document is not None else text
        outside, blocks = find_blocks(text, "```tool_call", "```", offset, document)
        return outside.strip(), [load_call(inner.strip(), inner_offset, document) for inner, inner_offset in blocks]

    def encode_tool(self, message: Message) -> str:
        return f"```tool_result\n{message.content}\n```"

    def decode_tool(self, text: str, offset: int, document: str) -> Tuple[str, Optional[str]]:
        opening, closing = "```tool_result\n", "\n```"
        if not text.startswith(opening) or not text.endswith(closing) or len(text) < len(opening) + len(closing):
            raise syntax_error(document, offset, "A tool frame must hold exactly one ```tool_result block")
        return text[len(opening) : len(text) - len(closing)], None


class RolePrefixedDialect(Dialect):
    """
    Plain text protocol: every message starts with a `ROLE:` line, its other lines are prefixed
    with `| `, and the calls of an assistant turn follow as `CALL: {...}` lines.
    """

    id = "role-prefixed"

    TAGS = {Role.SYSTEM: "SYSTEM", Role.USER: "USER", Role.ASSISTANT: "ASSISTANT", Role.TOOL: "TOOL"}
    HEADER = re.compile(r"^(SYSTEM|USER|ASSISTANT|TOOL):(?: (.*))?$")
    CALL_PREFIX = "CALL: "

    def _content_lines(self, tag: str, content: str) -> List[str]:
        first, *rest = content.split("\n")
        lines = [f"{tag}: {first}" if first else f"{tag}:"]
        lines.extend(f"| {line}" if line else "|" for line in rest)
        return lines

    def render_messages(self, messages: List[Message]) -> str:
        lines: List[str] = []
        for message in messages:
            lines.extend(self._content_lines(self.TAGS[message.role], message.content))
            lines.extend(self.CALL_PREFIX + dump_call(call) for call in message.tool_calls)
        return "\n".join(lines)

    def parse_messages(self, text: str, offset: int = 0, document: Optional[str] = None) -> List[Message]:
        document = document if document is not None else text
        roles = {tag: role for role, tag in self.TAGS.items()}

        parsed: List[Tuple[Role, List[str], List[ToolCall]]] = []
        for line, line_offset in iter_lines(text, offset):
            header = self.HEADER.match(line)
            if header is not None:
                parsed.append((roles[header.group(1)], [header.group(2) or ""], []))
            elif line == "|" or line.startswith("| "):
                if not parsed:
                    raise syntax_error(document, line_offset, "Continuation line outside of any message")
                parsed[-1][1].append(line[2:])
            elif line.startswith(self.CALL_PREFIX):
                if not parsed or parsed[-1][0] != Role.ASSISTANT:
                    raise syntax_error(document, line_offset, "CALL line outside of an assistant message")
                parsed[-1][2].append(load_call(line[len(self.CALL_PREFIX) :], line_offset + len(self.CALL_PREFIX), document))
            elif line.strip():
                raise syntax_error(document, line_offset, f"Unexpected line {line[:40]!r}")

        messages = [
            Message(
                role=role,
                content="\n".join(lines),
                tool_calls=calls,
                tool_call_id="pending" if role == Role.TOOL else None,
            )
            for role, lines, calls in parsed
        ]
        return link_tool_messages(messages, reassign=True)

    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        document = document if document is not None else text
        content: List[str] = []
        calls: List[ToolCall] = []
        for line, line_offset in iter_lines(text, offset):
            if line.startswith(self.CALL_PREFIX):
                calls.append(load_call(line[len(self.CALL_PREFIX) :], line_offset + len(self.CALL_PREFIX), document))
            else:
                content.append(line)
        return "\n".join(content).strip(), calls
