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

import logging
from typing import Any, Dict, List, Optional, Tuple

from agentscale.capabilities.builtins import builtin_descriptor
from agentscale.capabilities.environment import CapabilityEnvironment
from agentscale.capabilities.mcp.session import McpSession, RemoteTool, allowed_remote_tools, mcp_call
from agentscale.capabilities.scripts import script_descriptor
from agentscale.capabilities.tools import ExecutorKind, Observation, ToolDescriptor, ToolRegistry
from agentscale.config.schema import FINAL_ANSWER_TOOL, AgentSpec, FrameworkConfig, TerminationMode, ToolKind, ToolRef
from agentscale.exceptions import McpTransportError, UnresolvedRef

LOGGER = logging.getLogger(__name__)


def sub_agent_descriptor(name: str, child: AgentSpec, env: CapabilityEnvironment, description: str = "") -> ToolDescriptor:
    """
    Wrap an agent as a tool.  From the model point of view it is just another tool, taking the delegation
    input schema of the child.
    """

    def executor(arguments: Dict[str, Any], ctx: Any) -> Observation:
        if env.delegate is None:
            return Observation.failure("delegation_unavailable", agent=child.name)
        return env.delegate(ctx, child, name, arguments)

    return ToolDescriptor(
        name=name,
        description=description or child.summary,
        input_schema=child.delegation_schema,
        kind=ExecutorKind.SUB_AGENT,
        executor=executor,
    )


def mcp_descriptor(name: str, session: McpSession, remote: RemoteTool, description: str = "") -> ToolDescriptor:
    def executor(arguments: Dict[str, Any], ctx: Any) -> Observation:
        try:
            return mcp_call(session, remote.name, arguments)
        except McpTransportError as e:
            # A dead server is feedback for the model, not a failure of the run
            return Observation.failure("mcp_unreachable", server=session.server.name, tool=remote.name, message=str(e))

    return ToolDescriptor(
        name=name,
        description=description or remote.description or f"Call {remote.name} on the {session.server.name} server.",
        input_schema=remote.input_schema,
        kind=ExecutorKind.MCP,
        executor=executor,
    )


def mcp_location(tool: ToolRef) -> Tuple[str, str]:
    """
    The (server, remote tool) pair an mcp tool reference points to, its source reads "<server>/<tool>".
    """
    server_name, _, remote_name = tool.source.partition("/")
    return server_name, remote_name or tool.name


def _declared_mcp_tool(tool: ToolRef, agent: AgentSpec, env: CapabilityEnvironment) -> ToolDescriptor:
    server_name, remote_name = mcp_location(tool)
    spec = next((s for s in agent.mcp_servers if s.name == server_name), None)
    if spec is None:
        raise UnresolvedRef(f"Tool {tool.name} of agent {agent.name} refers to an unknown mcp server {server_name!r}")

    session = env.open_mcp(spec)
    remote = next((t for t in allowed_remote_tools(session.negotiated_tools, spec) if t.name == remote_name), None)
    if remote is None:
        raise UnresolvedRef(f"Mcp server {server_name} does not expose a tool named {remote_name!r}")

    if tool.input_schema:
        remote = remote._replace(input_schema=tool.input_schema)
    return mcp_descriptor(tool.name, session, remote, tool.description)


def _declared_tool(tool: ToolRef, agent: AgentSpec, framework: FrameworkConfig, env: CapabilityEnvironment) -> ToolDescriptor:
    if tool.kind == ToolKind.BUILTIN:
        return builtin_descriptor(tool.name, tool.source, tool.description, tool.input_schema or None)

    if tool.kind == ToolKind.CUSTOM_SCRIPT:
        if not tool.source:
            raise UnresolvedRef(f"Script tool {tool.name} of agent {agent.name} has no source")
        return script_descriptor(
            tool.name,
            env.resolve_path(tool.source),
            tool.description,
            tool.input_schema,
            env.script_timeout,
        )

    if tool.kind == ToolKind.MCP:
        return _declared_mcp_tool(tool, agent, env)

    child = framework.resolve(tool.source or tool.name)
    if child is None:
        raise UnresolvedRef(f"Sub-agent tool {tool.name} of agent {agent.name} refers to an unknown agent {tool.source!r}")
    return sub_agent_descriptor(tool.name, child, env, tool.description)


def build_registry(
    agent: AgentSpec,
    framework: FrameworkConfig,
    env: Optional[CapabilityEnvironment] = None,
) -> ToolRegistry:
    """
    Build the namespace of an agent: its declared tools, its sub-agents wrapped as tools, the final_answer
    builtin when the agent terminates through it, and the tools of its mcp servers not declared explicitly.

    :raises UnresolvedRef: If a reference of the agent can not be resolved
    :raises NameCollision: If two callables of the agent share a name
    """
    env = env or CapabilityEnvironment()
    registry = ToolRegistry()

    for tool in agent.tools:
        registry.add(_declared_tool(tool, agent, framework, env), agent=agent.name)

    for entry in agent.sub_agents:
        child = framework.resolve(entry)
        if child is None:
            raise UnresolvedRef(f"Agent {agent.name} refers to an unknown sub-agent {getattr(entry, 'ref', entry)!r}")
        registry.add(sub_agent_descriptor(child.name, child, env), agent=agent.name)

    if agent.termination.mode == TerminationMode.FINAL_ANSWER_TOOL and FINAL_ANSWER_TOOL not in registry:
        registry.add(builtin_descriptor(FINAL_ANSWER_TOOL), agent=agent.name)

    declared = {mcp_location(tool) for tool in agent.tools if tool.kind == ToolKind.MCP}
    for spec in agent.mcp_servers:
        session = env.open_mcp(spec)
        added: List[str] = []
        for remote in allowed_remote_tools(session.negotiated_tools, spec):
            if (spec.name, remote.name) in declared:
                continue
            name = remote.name if remote.name not in registry else f"{spec.name}__{remote.name}"
            registry.add(mcp_descriptor(name, session, remote), agent=agent.name)
            added.append(name)
        LOGGER.debug(f"Agent {agent.name} got {added} from mcp server {spec.name}")

    return registry
