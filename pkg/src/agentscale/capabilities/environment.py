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
import threading
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Dict, Optional, Tuple

from agentscale.capabilities.mcp.session import McpSession, SessionState
from agentscale.capabilities.mcp.transport import McpTransport, open_transport
from agentscale.capabilities.scripts import script_timeout_from_env
from agentscale.capabilities.storage import GlobalStorage
from agentscale.capabilities.tools import Observation
from agentscale.config.schema import AgentSpec, McpServerSpec
from agentscale.exceptions import SessionStateError

if TYPE_CHECKING:
    from agentscale.runtime.context import ExecutionContext

LOGGER = logging.getLogger(__name__)

McpFactory = Callable[[McpServerSpec], McpTransport]
Delegate = Callable[["ExecutionContext", AgentSpec, str, Dict[str, Any]], Observation]
SessionKey = Tuple[str, str, str]


def session_key(spec: McpServerSpec) -> SessionKey:
    return spec.name, spec.transport.value, spec.endpoint


class CapabilityEnvironment:
    """
    Everything the executors of one run share: the storage, the directory relative paths are resolved
    against, the mcp sessions and the hook used to delegate to sub-agents.

    Mcp sessions are opened lazily, once per server, and closed with the environment.
    """

    def __init__(
        self,
        *,
        storage: Optional[GlobalStorage] = None,
        base_dir: Optional[Path] = None,
        script_timeout: Optional[float] = None,
        mcp_factory: Optional[McpFactory] = None,
        delegate: Optional[Delegate] = None,
    ) -> None:
        self.storage = storage if storage is not None else GlobalStorage()
        self.base_dir = (base_dir or Path.cwd()).absolute()
        self.script_timeout = script_timeout if script_timeout is not None else script_timeout_from_env()
        self.mcp_factory = mcp_factory or open_transport
        self.delegate = delegate

        self._sessions: Dict[str, McpSession] = {}
        self._lock = threading.Lock()

    def resolve_path(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def open_mcp(self, spec: McpServerSpec) -> McpSession:
        """
        Get the session of the given server, initializing it the first time.  Sessions are shared by the
        declarations with the same name, transport and endpoint, and list every tool of the server: the
        allowed_tools filter of each declaration is applied by the registry of the declaring agent.  A failed
        initialization is not retried within the same environment.
        """
        key = session_key(spec)
        with self._lock:
            session = self._sessions.get(key)
            if session is None:
                session = McpSession(spec.model_copy(update={"allowed_tools": None}), self.mcp_factory(spec))
                self._sessions[key] = session
                LOGGER.debug(f"Opening mcp session {spec.name} ({spec.transport.value} {spec.endpoint})")
                session.initialize()
                session.list_tools()
            elif session.state != SessionState.INITIALIZED:
                raise SessionStateError(f"Mcp session {spec.name} is {session.state.value}")
            return session

    @property
    def sessions(self) -> Dict[SessionKey, McpSession]:
        return dict(self._sessions)

    def close(self) -> None:
        with self._lock:
            for (name, _, _), session in self._sessions.items():
                if session.state == SessionState.INITIALIZED:
                    LOGGER.debug(f"Closing mcp session {name}")
                    session.close()
                elif session.state == SessionState.FAILED:
                    session.transport.close()
            self._sessions.clear()
