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
import logging
import sys
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import click  # type: ignore

from agentscale.capabilities.mcp import protocol
from agentscale.helpers.schema import argument_violations
from agentscale.helpers.utils import setup_logging

LOGGER = logging.getLogger(__name__)

# Fault code making the server answer with a frame that is not json
MALFORMED = 0


class Fault(NamedTuple):
    code: int
    message: str = "Injected fault"


def _number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else str(value)


TOOLS: Dict[str, Dict[str, Any]] = {
    "add": {
        "description": "Add two numbers and return the sum.",
        "inputSchema": {
            "type": "object",
            "properties": {"a": {"type": "number"}, "b": {"type": "number"}},
            "required": ["a", "b"],
        },
    },
    "echo": {
        "description": "Return the given text.",
        "inputSchema": {"type": "object", "properties": {"text": {"type": "string"}}, "required": ["text"]},
    },
    "upper": {
        "description": "Return the given text in upper case.",
        "inputSchema": {"type": "object", "properties": {"text": {"type": "string"}}, "required": ["text"]},
    },
}

IMPLEMENTATIONS: Dict[str, Callable[[Dict[str, Any]], str]] = {
    "add": lambda args: _number(args["a"] + args["b"]),
    "echo": lambda args: str(args["text"]),
    "upper": lambda args: str(args["text"]).upper(),
}


class MockMcpServer:
    """
    Small in-process mcp server, used as the reference peer of the client.  It implements initialize,
    tools/list and tools/call over json-rpc 2.0, and can be told to fail.

    Faults are keyed by method name, or by "tools/call:<tool>" to only affect one tool.
    """

    def __init__(self, faults: Optional[Dict[str, Fault]] = None) -> None:
        self.faults = dict(faults or {})
        self.initialized = False
        self.calls: List[Dict[str, Any]] = []

    @classmethod
    def from_spec(cls, spec: str) -> "MockMcpServer":
        """
        Build a server from a fault specification: comma separated `<key>=<code>` items.
        """
        faults: Dict[str, Fault] = {}
        for item in filter(None, spec.split(",")):
            key, _, code = item.partition("=")
            faults[key.strip()] = Fault(int(code))
        return cls(faults)

    def _fault(self, frame: Dict[str, Any]) -> Optional[Fault]:
        method = frame.get("method", "")
        if method == "tools/call":
            name = (frame.get("params") or {}).get("name", "")
            if f"tools/call:{name}" in self.faults:
                return self.faults[f"tools/call:{name}"]
        return self.faults.get(method)

    def handle(self, frame: Any) -> Optional[Dict[str, Any]]:
        """
        Answer one parsed frame.  Notifications get no answer.
        """
        if not isinstance(frame, dict) or frame.get("jsonrpc") != protocol.JSONRPC_VERSION or "method" not in frame:
            return protocol.error(None, protocol.INVALID_REQUEST, "Invalid request")

        method = frame["method"]
        request_id = frame.get("id")
        if request_id is None:
            LOGGER.debug(f"Received notification {method}")
            return None

        fault = self._fault(frame)
        if fault is not None:
            return protocol.error(request_id, fault.code, fault.message)

        params = frame.get("params") or {}
        if method == "initialize":
            self.initialized = True
            return protocol.result(
                request_id,
                {
                    "protocolVersion": protocol.PROTOCOL_VERSION,
                    "capabilities": {"tools": {}},
                    "serverInfo": {"name": "agentscale-mock", "version": "1"},
                },
            )

        if method == "ping":
            return protocol.result(request_id, {})

        if method == "tools/list":
            tools = [{"name": name, **tool} for name, tool in TOOLS.items()]
            return protocol.result(request_id, {"tools": tools})

        if method == "tools/call":
            return self._call(request_id, params)

        return protocol.error(request_id, protocol.METHOD_NOT_FOUND, f"Method not found: {method}")

    def _call(self, request_id: Any, params: Dict[str, Any]) -> Dict[str, Any]:
        name = params.get("name")
        arguments = params.get("arguments", {})
        if name not in TOOLS:
            return protocol.error(request_id, protocol.INVALID_PARAMS, f"Unknown tool: {name}")

        violations = argument_violations(TOOLS[name]["inputSchema"], arguments)
        if violations:
            return protocol.error(request_id, protocol.INVALID_PARAMS, "Invalid params", violations)

        self.calls.append({"name": name, "arguments": arguments})
        text = IMPLEMENTATIONS[name](arguments)
        return protocol.result(request_id, {"content": [{"type": "text", "text": text}], "isError": False})

    def handle_line(self, line: str) -> Optional[str]:
        """
        Answer one raw frame, as received on the wire.
        """
        try:
            frame = json.loads(line)
        except json.JSONDecodeError:
            return json.dumps(protocol.error(None, protocol.PARSE_ERROR, "Parse error"))

        if isinstance(frame, dict) and (fault := self._fault(frame)) is not None and fault.code == MALFORMED:
            return "{this is not json"

        response = self.handle(frame)
        return json.dumps(response, ensure_ascii=False) if response is not None else None

    def serve(self, stdin: Any = None, stdout: Any = None) -> None:
        """
        Serve frames line by line until the input stream is closed.
        """
        stdin = stdin or sys.stdin
        stdout = stdout or sys.stdout
        for line in stdin:
            if not line.strip():
                continue
            response = self.handle_line(line)
            if response is not None:
                stdout.write(response + "\n")
                stdout.flush()


@click.command()
@click.option(
    "--trace",
    is_flag=True,
    help="Enable trace level logging",
)
@click.option(
    "--faults",
    default="",
    show_default=True,
    help="Faults to inject, as comma separated <method or tools/call:<tool>>=<code> items",
)
def main(trace: bool, faults: str) -> None:
    # Stdout is the protocol channel, logs go to stderr
    setup_logging(trace, stream=sys.stderr)
    MockMcpServer.from_spec(faults).serve()


if __name__ == "__main__":
    main()
