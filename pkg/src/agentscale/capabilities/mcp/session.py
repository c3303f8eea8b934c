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
import itertools
import logging
from typing import Any, Dict, List, NamedTuple, Optional

from agentscale.capabilities.mcp import protocol
from agentscale.capabilities.mcp.transport import McpTransport, open_transport
from agentscale.capabilities.tools import Observation
from agentscale.config.schema import McpServerSpec
from agentscale.exceptions import McpTransportError, ProtocolError, RemoteToolError, SessionStateError

LOGGER = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0


class SessionState(str, enum.Enum):
    NEW = "new"
    INITIALIZED = "initialized"
    FAILED = "failed"
    CLOSED = "closed"


class RemoteTool(NamedTuple):
    name: str
    description: str
    input_schema: Dict[str, Any]


class McpSession:
    """
    The client side of a connection to one mcp server.  The only legal transitions are
    new -> initialized, new -> failed and initialized -> closed.  Any operation attempted in another
    state raises SessionStateError and leaves the session as it was.
    """

    def __init__(self, server: McpServerSpec, transport: McpTransport, *, timeout: float = DEFAULT_TIMEOUT) -> None:
        self.server = server
        self.transport = transport
        self.timeout = timeout
        self.state = SessionState.NEW
        self.negotiated_tools: List[RemoteTool] = []
        self.server_info: Dict[str, Any] = {}
        self._ids = itertools.count(1)

    def _require(self, operation: str, *states: SessionState) -> None:
        if self.state not in states:
            raise SessionStateError(
                f"Can not {operation} mcp session {self.server.name} in state {self.state.value}, "
                f"expected one of {[s.value for s in states]}"
            )

    def _request(self, method: str, params: Optional[Dict[str, Any]] = None) -> Any:
        request_id = next(self._ids)
        frame = protocol.request(request_id, method, params)
        LOGGER.debug(f"mcp[{self.server.name}] > {frame}")
        self.transport.send(frame)

        while True:
            raw = self.transport.receive(timeout=self.timeout)
            LOGGER.debug(f"mcp[{self.server.name}] < {raw}")
            response = protocol.parse_frame(raw)
            if "method" in response:
                # Server side notifications and requests are not part of the supported subset
                LOGGER.debug(f"Ignoring {response['method']} frame from {self.server.name}")
                continue
            if response.get("id") != request_id:
                raise ProtocolError(f"Expected a response to request {request_id}, got id {response.get('id')!r}")
            break

        if "error" in response:
            err = response["error"]
            raise RemoteToolError(int(err.get("code", protocol.INTERNAL_ERROR)), str(err.get("message", "")), err.get("data"))

        return response["result"]

    def _fail(self) -> None:
        # A server that refused the handshake may still be running
        self.state = SessionState.FAILED
        try:
            self.transport.close()
        except McpTransportError as e:
            LOGGER.debug(f"Failed to close the transport of {self.server.name}: {e}")

    def initialize(self) -> "McpSession":
        """
        Open the transport and do the initialize handshake.

        :raises McpTransportError: If the server can not be reached, the session is then failed
        :raises ProtocolError: If the server answers garbage, the session is then failed
        """
        self._require("initialize", SessionState.NEW)
        try:
            self.transport.open()
            result = self._request(
                "initialize",
                {
                    "protocolVersion": protocol.PROTOCOL_VERSION,
                    "capabilities": {},
                    "clientInfo": {"name": "agentscale", "version": "1"},
                },
            )
            if not isinstance(result, dict) or "protocolVersion" not in result:
                raise ProtocolError(f"Invalid initialize result from {self.server.name}: {result!r}")
            self.transport.send(protocol.notification("notifications/initialized"))
        except RemoteToolError as e:
            self._fail()
            raise ProtocolError(f"Server {self.server.name} refused to initialize: {e}")
        except (McpTransportError, ProtocolError):
            self._fail()
            raise

        self.server_info = result.get("serverInfo", {})
        self.state = SessionState.INITIALIZED
        LOGGER.debug(f"Mcp session {self.server.name} initialized with {self.server_info}")
        return self

    def list_tools(self) -> List[RemoteTool]:
        """
        Ask the server for its tools, keeping only the ones the server declaration allows.
        """
        self._require("list the tools of", SessionState.INITIALIZED)
        result = self._request("tools/list")
        tools = [
            RemoteTool(
                name=str(tool["name"]),
                description=str(tool.get("description") or ""),
                input_schema=dict(tool.get("inputSchema") or {}),
            )
            for tool in result.get("tools", [])
        ]
        self.negotiated_tools = allowed_remote_tools(tools, self.server)
        return list(self.negotiated_tools)

    def call_tool(self, name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """
        :raises RemoteToolError: If the server answered with an error
        """
        self._require("call a tool of", SessionState.INITIALIZED)
        result = self._request("tools/call", {"name": name, "arguments": arguments})
        if not isinstance(result, dict):
            raise ProtocolError(f"Invalid tools/call result from {self.server.name}: {result!r}")
        return result

    def close(self) -> None:
        self._require("close", SessionState.INITIALIZED)
        self.transport.close()
        self.state = SessionState.CLOSED


def allowed_remote_tools(tools: List[RemoteTool], server: McpServerSpec) -> List[RemoteTool]:
    """
    The tools a server declaration lets through, all of them when it has no allowed_tools list.
    """
    if server.allowed_tools is None:
        return list(tools)
    allowed = set(server.allowed_tools)
    return [tool for tool in tools if tool.name in allowed]


def mcp_initialize(spec: McpServerSpec, transport: Optional[McpTransport] = None) -> McpSession:
    return McpSession(spec, transport or open_transport(spec)).initialize()


def mcp_list_tools(session: McpSession) -> List[RemoteTool]:
    return session.list_tools()


def _text(result: Dict[str, Any]) -> str:
    parts = [str(item.get("text", "")) for item in result.get("content", []) if item.get("type") == "text"]
    return "\n".join(parts)


def mcp_call(session: McpSession, tool: str, arguments: Dict[str, Any]) -> Observation:
    """
    Call a remote tool.  Errors of the remote side are returned in band, as error observations, so that
    the model gets to see them.
    """
    try:
        result = session.call_tool(tool, arguments)
    except RemoteToolError as e:
        LOGGER.debug(f"Remote tool {session.server.name}/{tool} failed: {e}")
        return Observation.failure("remote_error", tool=tool, code=e.code, message=e.message, data=e.data)

    text = _text(result)
    if result.get("isError"):
        return Observation.failure("remote_tool_failed", tool=tool, message=text)
    return Observation(content=text, data=result)
