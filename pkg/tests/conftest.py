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
import textwrap
from pathlib import Path
from typing import Any, Callable, Dict

import pytest

from agentscale.config import FrameworkConfig, McpServerSpec, parse_framework
from agentscale.gateway.models import ModelTurn, ToolCall
from agentscale.gateway.scripted import ScriptedGateway

SIMPLE_FRAMEWORK = textwrap.dedent(
    """
    nexau_schema: 1
    name: helper
    description: One assistant with a few builtins
    root_agent:
      name: assistant
      system_prompt: You are a helpful assistant.
      model: default
      max_iterations: 5
      tools:
        - name: echo
          kind: builtin
        - name: fs_write
          kind: builtin
        - name: fs_read
          kind: builtin
    """
)

TEAM_FRAMEWORK = textwrap.dedent(
    """
    nexau_schema: 1
    name: team
    root_agent:
      name: manager
      system_prompt: You split the work and hand it over.
      model: default
      max_iterations: 6
      sub_agents:
        - worker
        - name: reviewer
          system_prompt: You review what the worker did.
          model: default
          max_iterations: 3
    agents:
      - name: worker
        system_prompt: You do the work.
        model: default
        max_iterations: 4
        tools:
          - name: echo
            kind: builtin
          - name: fs_write
            kind: builtin
    """
)


def call(name: str, **arguments: Any) -> ToolCall:
    return ToolCall(name=name, arguments=arguments)


@pytest.fixture
def simple_framework() -> FrameworkConfig:
    return parse_framework(SIMPLE_FRAMEWORK)


@pytest.fixture
def team_framework() -> FrameworkConfig:
    return parse_framework(TEAM_FRAMEWORK)


@pytest.fixture
def runs_dir(tmp_path: Path) -> Path:
    path = tmp_path / "runs"
    path.mkdir()
    return path


@pytest.fixture
def scripted() -> Callable[..., ScriptedGateway]:
    """
    Build a gateway answering the given turns in order, whatever the context asking.
    """

    def build(*turns: ModelTurn, strict: bool = True) -> ScriptedGateway:
        return ScriptedGateway.from_turns(*turns, strict=strict)

    return build


@pytest.fixture
def loopback() -> Callable[..., McpServerSpec]:
    def build(name: str = "calc", faults: str = "", allowed_tools: Any = None) -> McpServerSpec:
        endpoint = f"loopback:{faults}" if faults else "loopback"
        return McpServerSpec(name=name, endpoint=endpoint, allowed_tools=allowed_tools)

    return build


@pytest.fixture
def write_tree(tmp_path: Path) -> Callable[[Dict[str, str]], Path]:
    """
    Write a dictionary of relative paths to file contents under a fresh directory.
    """

    def write(files: Dict[str, str]) -> Path:
        for relative, content in files.items():
            path = tmp_path / relative
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(textwrap.dedent(content), encoding="utf-8")
        return tmp_path

    return write
