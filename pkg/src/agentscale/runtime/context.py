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

from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

from agentscale.capabilities.environment import CapabilityEnvironment
from agentscale.capabilities.tools import ToolRegistry
from agentscale.config.schema import AgentSpec
from agentscale.gateway.models import Message, Role

if TYPE_CHECKING:
    from agentscale.runtime.engine import AgentRuntime


class ExecutionContext:
    """
    The private state of one agent instance: its message history, its namespace and its position in the
    run.  A context is never shared, children get a fresh one and only their final answer comes back.
    """

    def __init__(
        self,
        agent: AgentSpec,
        registry: ToolRegistry,
        env: CapabilityEnvironment,
        *,
        run_id: str,
        context_path: Tuple[str, ...],
        parent: Optional["ExecutionContext"] = None,
        runtime: Optional["AgentRuntime"] = None,
    ) -> None:
        self.agent = agent
        self.registry = registry
        self.env = env
        self.run_id = run_id
        self.context_path = context_path
        self.parent = parent
        self.runtime = runtime

        self.messages: List[Message] = []
        self.iteration = 0
        self.injected_skills: List[str] = []
        self.delegation_counts: Dict[str, int] = {}
        self.current_call_id: Optional[str] = None

    @property
    def path(self) -> str:
        return "/".join(self.context_path)

    @property
    def is_root(self) -> bool:
        return self.parent is None

    @property
    def token_count(self) -> int:
        """
        Whitespace token count of the whole history, nothing is ever evicted from it.
        """
        return sum(len(message.content.split()) for message in self.messages)

    @property
    def last_assistant_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == Role.ASSISTANT:
                return message.content
        return ""

    def append(self, message: Message) -> None:
        self.messages.append(message)

    def child_segment(self, agent_name: str) -> str:
        """
        The path segment of the next child context for the given agent, the second delegation to the same
        agent gets "<name>#2" and so on.
        """
        count = self.delegation_counts.get(agent_name, 0) + 1
        self.delegation_counts[agent_name] = count
        return agent_name if count == 1 else f"{agent_name}#{count}"

    def __repr__(self) -> str:
        return f"ExecutionContext(run_id={self.run_id}, iteration={self.iteration}/{self.agent.max_iterations})"
