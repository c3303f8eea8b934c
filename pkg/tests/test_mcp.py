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
import shlex
import sys
from typing import Any, Callable, List

import pytest
import requests

from agentscale.capabilities.environment import CapabilityEnvironment, session_key
from agentscale.capabilities.mcp import protocol
from agentscale.capabilities.mcp.mock_server import MockMcpServer
from agentscale.capabilities.mcp.session import McpSession, SessionState, mcp_call
from agentscale.capabilities.mcp.transport import HttpTransport, LoopbackTransport, StdioTransport, open_transport
from agentscale.capabilities.registry import build_registry
from agentscale.config import McpServerSpec, McpTransportKind, parse_framework
from agentscale.exceptions import McpTransportError, ProtocolError, SessionStateError

MOCK_COMMAND = f"{shlex.quote(sys.executable)} -m agentscale.capabilities.mcp.mock_server"


def session_for(spec: McpServerSpec) -> McpSession:
    return McpSession(spec, open_transport(spec), timeout=10)


def test_handshake_and_call(loopback: Callable[..., McpServerSpec]) -> None:
    session = session_for(loopback()).initialize()
    assert session.state == SessionState.INITIALIZED
    assert session.server_info["name"] == "agentscale-mock"
    assert [tool.name for tool in session.list_tools()] == ["add", "echo", "upper"]

    observation = mcp_call(session, "add", {"a": 2, "b": 3})
    assert observation.content == "5"
    assert not observation.is_error


def test_allowed_tools_filter(loopback: Callable[..., McpServerSpec]) -> None:
    session = session_for(loopback(allowed_tools=["upper"])).initialize()
    assert [tool.name for tool in session.list_tools()] == ["upper"]


def test_illegal_transitions_leave_the_state_alone(loopback: Callable[..., McpServerSpec]) -> None:
    session = session_for(loopback())
    with pytest.raises(SessionStateError):
        session.call_tool("add", {"a": 1, "b": 1})
    assert session.state == SessionState.NEW
    with pytest.raises(SessionStateError):
        session.close()
    assert session.state == SessionState.NEW

    session.initialize()
    with pytest.raises(SessionStateError):
        session.initialize()
    assert session.state == SessionState.INITIALIZED

    session.close()
    assert session.state == SessionState.CLOSED
    for operation in (session.list_tools, session.close, session.initialize):
        with pytest.raises(SessionStateError):
            operation()
    assert session.state == SessionState.CLOSED


def test_refused_initialize_fails_the_session(loopback: Callable[..., McpServerSpec]) -> None:
    session = session_for(loopback(faults="initialize=-32603"))
    with pytest.raises(ProtocolError):
        session.initialize()
    assert session.state == SessionState.FAILED
    with pytest.raises(SessionStateError):
        session.initialize()


@pytest.mark.parametrize(
    "faults, tool, arguments",
    [
        ("tools/call:add=-32602", "add", {"a": 1, "b": 2}),
        ("", "add", {"a": "one", "b": 2}),
        ("", "teleport", {}),
    ],
)
def test_remote_errors_are_observations(loopback: Callable[..., McpServerSpec], faults: str, tool: str, arguments: Any) -> None:
    session = session_for(loopback(faults=faults)).initialize()
    observation = mcp_call(session, tool, arguments)
    assert observation.is_error
    assert observation.data["error"] == "remote_error"
    assert observation.data["code"] == protocol.INVALID_PARAMS
    assert session.state == SessionState.INITIALIZED


def test_malformed_frame(loopback: Callable[..., McpServerSpec]) -> None:
    session = session_for(loopback(faults="tools/list=0")).initialize()
    with pytest.raises(ProtocolError):
        session.list_tools()


def test_mock_server_rejects_garbage() -> None:
    server = MockMcpServer()
    assert json.loads(server.handle_line("{oops"))["error"]["code"] == protocol.PARSE_ERROR
    assert server.handle({"jsonrpc": "1.0", "method": "ping", "id": 1})["error"]["code"] == protocol.INVALID_REQUEST
    assert server.handle({"jsonrpc": "2.0", "method": "resources/list", "id": 2})["error"]["code"] == protocol.METHOD_NOT_FOUND
    assert server.handle({"jsonrpc": "2.0", "method": "notifications/initialized"}) is None


def test_unreachable_server_is_an_observation(loopback: Callable[..., McpServerSpec]) -> None:
    spec = loopback()
    framework = parse_framework(
        "name: f\nroot_agent:\n  name: a\n  system_prompt: p\n  model: m\n"
        "  mcp_servers:\n    - {name: calc, endpoint: loopback}\n"
    )
    env = CapabilityEnvironment()
    registry = build_registry(framework.root_agent, framework, env)
    env.sessions[session_key(spec)].transport.close()

    observation = registry.get("add").executor({"a": 1, "b": 2}, None)
    assert observation.is_error
    assert observation.data["error"] == "mcp_unreachable"


def test_registry_exposes_server_tools() -> None:
    framework = parse_framework(
        "name: f\nroot_agent:\n  name: a\n  system_prompt: p\n  model: m\n"
        "  tools:\n    - {name: plus, kind: mcp, source: calc/add}\n    - {name: echo, kind: builtin}\n"
        "  mcp_servers:\n    - {name: calc, endpoint: loopback}\n"
    )
    env = CapabilityEnvironment()
    registry = build_registry(framework.root_agent, framework, env)
    assert registry.names == ["plus", "echo", "calc__echo", "upper"]
    assert registry.get("plus").executor({"a": 20, "b": 22}, None).content == "42"
    env.close()
    assert env.sessions == {}


def test_environment_reuses_sessions(loopback: Callable[..., McpServerSpec]) -> None:
    env = CapabilityEnvironment()
    spec = loopback()
    assert env.open_mcp(spec) is env.open_mcp(spec)

    broken = loopback(name="broken", faults="initialize=-32603")
    with pytest.raises(ProtocolError):
        env.open_mcp(broken)
    with pytest.raises(SessionStateError):
        env.open_mcp(broken)


def test_agents_sharing_a_server_name_keep_their_own_filter() -> None:
    framework = parse_framework(
        "name: f\nroot_agent:\n  name: boss\n  system_prompt: p\n  model: m\n"
        "  mcp_servers:\n    - {name: calc, endpoint: loopback, allowed_tools: [add]}\n"
        "  sub_agents:\n    - name: helper\n      system_prompt: p\n      model: m\n"
        "      mcp_servers:\n        - {name: calc, endpoint: loopback, allowed_tools: [upper]}\n"
    )
    env = CapabilityEnvironment()
    boss = build_registry(framework.root_agent, framework, env)
    helper_agent = framework.resolve("helper")
    assert helper_agent is not None
    helper = build_registry(helper_agent, framework, env)
    assert "add" in boss.names and "upper" not in boss.names
    assert "upper" in helper.names and "add" not in helper.names
    assert len(env.sessions) == 1
    env.close()


def test_servers_with_one_name_and_two_endpoints_get_two_sessions(loopback: Callable[..., McpServerSpec]) -> None:
    env = CapabilityEnvironment()
    plain = env.open_mcp(loopback())
    faulty = env.open_mcp(loopback(faults="tools/call:add=-32602"))
    assert plain is not faulty
    assert not mcp_call(plain, "add", {"a": 1, "b": 1}).is_error
    assert mcp_call(faulty, "add", {"a": 1, "b": 1}).is_error
    env.close()


class RecordingStdioTransport(StdioTransport):
    def open(self) -> None:
        super().open()
        self.process = self._process


def test_refused_stdio_server_is_stopped() -> None:
    transports: List[RecordingStdioTransport] = []

    def factory(spec: McpServerSpec) -> RecordingStdioTransport:
        transports.append(RecordingStdioTransport(spec.name, spec.endpoint))
        return transports[-1]

    env = CapabilityEnvironment(mcp_factory=factory)
    spec = McpServerSpec(name="sub", endpoint=f"{MOCK_COMMAND} --faults initialize=-32600")
    with pytest.raises(ProtocolError):
        env.open_mcp(spec)
    assert env.sessions[session_key(spec)].state == SessionState.FAILED
    env.close()
    assert transports[0].process.poll() is not None


def test_stdio_subprocess() -> None:
    spec = McpServerSpec(name="sub", endpoint=MOCK_COMMAND)
    transport = open_transport(spec)
    assert isinstance(transport, StdioTransport)

    session = McpSession(spec, transport, timeout=30).initialize()
    try:
        assert [tool.name for tool in session.list_tools()] == ["add", "echo", "upper"]
        assert mcp_call(session, "upper", {"text": "hi"}).content == "HI"
    finally:
        session.close()
    assert session.state == SessionState.CLOSED


def test_stdio_subprocess_with_faults() -> None:
    spec = McpServerSpec(name="sub", endpoint=f"{MOCK_COMMAND} --faults tools/call:echo=-32602")
    session = session_for(spec).initialize()
    try:
        assert mcp_call(session, "echo", {"text": "x"}).data["code"] == -32602
        assert mcp_call(session, "upper", {"text": "x"}).content == "X"
    finally:
        session.close()


def test_stdio_missing_command() -> None:
    session = session_for(McpServerSpec(name="ghost", endpoint="/nonexistent/mcp-server --stdio"))
    with pytest.raises(McpTransportError):
        session.initialize()
    assert session.state == SessionState.FAILED


class WireResponse:
    def __init__(self, text: str) -> None:
        self.text = text

    def raise_for_status(self) -> None:
        pass


class WireSession:
    """
    Route posted frames to an in-process server, the way an http mcp endpoint would.
    """

    def __init__(self, server: MockMcpServer, fail: bool = False) -> None:
        self.server = server
        self.fail = fail
        self.frames: List[str] = []

    def post(self, url: str, data: bytes, headers: Any, timeout: Any) -> WireResponse:
        if self.fail:
            raise requests.ConnectionError("connection refused")
        frame = data.decode("utf-8")
        self.frames.append(frame)
        return WireResponse(self.server.handle_line(frame) or "")

    def close(self) -> None:
        pass


def test_http_transport() -> None:
    spec = McpServerSpec(name="remote", transport=McpTransportKind.HTTP, endpoint="http://mcp.test/rpc")
    wire = WireSession(MockMcpServer())
    session = McpSession(spec, HttpTransport(spec.name, spec.endpoint, session=wire), timeout=5).initialize()
    assert mcp_call(session, "echo", {"text": "over http"}).content == "over http"
    assert json.loads(wire.frames[1])["method"] == "notifications/initialized"


def test_http_transport_unreachable() -> None:
    spec = McpServerSpec(name="remote", transport=McpTransportKind.HTTP, endpoint="http://mcp.test/rpc")
    session = McpSession(spec, HttpTransport(spec.name, spec.endpoint, session=WireSession(MockMcpServer(), fail=True)))
    with pytest.raises(McpTransportError):
        session.initialize()
    assert session.state == SessionState.FAILED


def test_loopback_is_the_default_for_the_loopback_endpoint(loopback: Callable[..., McpServerSpec]) -> None:
    transport = open_transport(loopback(faults="ping=-32000"))
    assert isinstance(transport, LoopbackTransport)
    assert transport.server.faults["ping"].code == -32000
