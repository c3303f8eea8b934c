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

import re
from typing import List, Optional, Tuple

from agentscale.gateway.models import Message, ToolCall
from agentscale.trajectory.dialects.base import (
    ChatMLDialect,
    dump_arguments,
    dump_call,
    find_blocks,
    load_arguments,
    load_call,
    syntax_error,
)


class XmlInlineDialect(ChatMLDialect):
    """
    Tool calls are json objects inside <tool_call> tags, following the free text of the turn.  Results
    come back in <tool_response> tags.  One call per turn.
    """

    id = "xml-inline"
    reserved = ("<tool_call>", "</tool_call>", "<tool_response", "</tool_response>")
    supports_parallel_calls = False

    def encode_assistant(self, content: str, calls: List[ToolCall]) -> str:
        self.check_content(content, "assistant")
        parts = [content] if content else []
        parts.extend(f"<tool_call>{dump_call(call)}</tool_call>" for call in calls)
        return "\n".join(parts)

    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        document = document if document is not None else text
        outside, blocks = find_blocks(text, "<tool_call>", "</tool_call>", offset, document)
        return outside.strip(), [load_call(inner, inner_offset, document) for inner, inner_offset in blocks]

    def encode_tool(self, message: Message) -> str:
        return f"<tool_response>{message.content}</tool_response>"

    def decode_tool(self, text: str, offset: int, document: str) -> Tuple[str, Optional[str]]:
        outside, blocks = find_blocks(text, "<tool_response>", "</tool_response>", offset, document)
        if len(blocks) != 1 or outside.strip():
            raise syntax_error(document, offset, "A tool frame must hold exactly one <tool_response> element")
        return blocks[0][0], None


class XmlInlineMultiDialect(XmlInlineDialect):
    """
    Like xml-inline, but a turn can carry any number of <tool_call> tags, answered by one named
    <tool_response> per call.
    """

    id = "xml-inline-multi"
    supports_parallel_calls = True

    RESPONSE_OPEN = re.compile(r'<tool_response name="([^"]*)">')

    def encode_tool(self, message: Message) -> str:
        return f'<tool_response name="{message.name or ""}">{message.content}</tool_response>'

    def decode_tool(self, text: str, offset: int, document: str) -> Tuple[str, Optional[str]]:
        match = self.RESPONSE_OPEN.match(text)
        if match is None or not text.endswith("</tool_response>"):
            raise syntax_error(document, offset, 'A tool frame must hold exactly one <tool_response name="..."> element')

        inner = text[match.end() : len(text) - len("</tool_response>")]
        if "</tool_response>" in inner:
            raise syntax_error(document, offset + match.end() + inner.index("</tool_response>"), "Unexpected </tool_response>")
        return inner, match.group(1) or None


class XmlBlockDialect(ChatMLDialect):
    """
    The free text of a turn goes in a <thinking> section, each call in its own <tool_call> section with
    <name> and <arguments> children.
    """

    id = "xml-block"
    reserved = (
        "<thinking>",
        "</thinking>",
        "<tool_call>",
        "</tool_call>",
        "<tool_result>",
        "</tool_result>",
        "<name>",
        "</name>",
        "<arguments>",
        "</arguments>",
    )

    def encode_assistant(self, content: str, calls: List[ToolCall]) -> str:
        self.check_content(content, "assistant")
        parts = [f"<thinking>\n{content}\n</thinking>"] if content else []
        for call in calls:
            arguments = dump_arguments(call.arguments)
            parts.append(f"<tool_call>\n<name>{call.name}</name>\n<arguments>{arguments}</arguments>\n</tool_call>")
        return "\n".join(parts)

    def decode_assistant(self, text: str, offset: int = 0, document: Optional[str] = None) -> Tuple[str, List[ToolCall]]:
        document = document if document is not None else text
        rest, blocks = find_blocks(text, "<tool_call>", "</tool_call>", offset, document)
        outside, thoughts = find_blocks(rest, "<thinking>", "</thinking>", offset, document)

        calls: List[ToolCall] = []
        for inner, inner_offset in blocks:
            _, names = find_blocks(inner, "<name>", "</name>", inner_offset, document)
            _, arguments = find_blocks(inner, "<arguments>", "</arguments>", inner_offset, document)
            if len(names) != 1 or len(arguments) != 1:
                raise syntax_error(document, inner_offset, "A <tool_call> needs exactly one <name> and one <arguments>")
            name, _ = names[0]
            payload, payload_offset = arguments[0]
            loaded = load_arguments(payload.strip() or "{}", payload_offset, document)
            calls.append(ToolCall(name=name.strip(), arguments=loaded))

        content = "\n".join(t.strip() for t, _ in thoughts)
        if outside.strip():
            content = "\n".join(part for part in (content, outside.strip()) if part)
        return content, calls

    def encode_tool(self, message: Message) -> str:
        return f"<tool_result>\n{message.content}\n</tool_result>"

    def decode_tool(self, text: str, offset: int, document: str) -> Tuple[str, Optional[str]]:
        outside, blocks = find_blocks(text, "<tool_result>", "</tool_result>", offset, document)
        if len(blocks) != 1 or outside.strip():
            raise syntax_error(document, offset, "A tool frame must hold exactly one <tool_result> element")
        inner = blocks[0][0]
        if inner.startswith("\n"):
            inner = inner[1:]
        if inner.endswith("\n"):
            inner = inner[:-1]
        return inner, None
