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
import threading
import time
from pathlib import Path
from typing import Any, Callable, Dict

import pytest
from conftest import call

from agentscale.capabilities.builtins import builtin_descriptor
from agentscale.capabilities.environment import CapabilityEnvironment
from agentscale.capabilities.registry import build_registry
from agentscale.capabilities.scripts import DEFAULT_SCRIPT_TIMEOUT, ScriptRunner, script_timeout_from_env
from agentscale.capabilities.skills import inject_skills, load_skill
from agentscale.capabilities.storage import GlobalStorage, storage_cas
from agentscale.capabilities.tools import ExecutorKind, Observation, ToolDescriptor, ToolRegistry
from agentscale.config import AgentSpec, FrameworkConfig, parse_framework
from agentscale.exceptions import InvalidToolSpec, NameCollision, SkillLoadError, UnresolvedRef
from agentscale.gateway.models import Message, Role
from agentscale.runtime.context import ExecutionContext

UPPER_SCRIPT = """
import json
import sys

arguments = json.load(sys.stdin)
print(arguments["text"].upper())
"""


def context(env: CapabilityEnvironment, run_id: str = "r1", registry: Any = None) -> ExecutionContext:
    agent = AgentSpec(name="a", system_prompt="You help.", model="default")
    if registry is None:
        registry = ToolRegistry(
            [builtin_descriptor(name) for name in ("echo", "fs_write", "fs_read", "fs_list", "storage_put", "storage_get")]
        )
    ctx = ExecutionContext(agent, registry, env, run_id=run_id, context_path=tuple(run_id.split("/")))
    ctx.append(Message(role=Role.SYSTEM, content=agent.system_prompt))
    return ctx


def dispatch(ctx: ExecutionContext, name: str, **arguments: Any) -> Observation:
    return ctx.registry.dispatch(call(name, **arguments), ctx)


def test_echo_and_argument_validation() -> None:
    ctx = context(CapabilityEnvironment())
    assert dispatch(ctx, "echo", msg="hello").content == "hello"

    missing = dispatch(ctx, "echo")
    assert missing.is_error
    assert missing.data["error"] == "schema_violation"
    assert missing.data["violations"][0]["field"] == "msg"

    unknown = dispatch(ctx, "teleport", where="mars")
    assert unknown.data == {"error": "unknown_tool", "tool": "teleport", "available": ctx.registry.names}


def test_files_are_shared_within_a_run_only() -> None:
    env = CapabilityEnvironment()
    root, child, other = context(env, "r1"), context(env, "r1/worker"), context(env, "r2")

    assert not dispatch(root, "fs_write", path="notes.md", content="draft").is_error
    assert dispatch(child, "fs_read", path="notes.md").content == "draft"
    assert dispatch(child, "fs_list").data == {"paths": ["notes.md"]}

    missing = dispatch(other, "fs_read", path="notes.md")
    assert missing.is_error
    assert missing.data["error"] == "not_found"


def test_storage_versions_and_shared_namespace() -> None:
    env = CapabilityEnvironment()
    first, second = context(env, "r1"), context(env, "r2")

    assert dispatch(first, "storage_get", key="k").data == {"key": "k", "version": 0}
    assert dispatch(first, "storage_put", key="k", value={"n": 1}).data["version"] == 1
    assert dispatch(first, "storage_put", key="k", value={"n": 2}).data["version"] == 2
    assert json.loads(dispatch(first, "storage_get", key="k").content) == {"n": 2}
    assert dispatch(second, "storage_get", key="k").data["version"] == 0

    dispatch(first, "storage_put", key="shared/total", value=10)
    assert dispatch(second, "storage_get", key="shared/total").content == "10"


def test_cas_semantics() -> None:
    storage = GlobalStorage()
    assert storage_cas(storage, "ns", "k", 0, "a") == (True, 1)
    assert storage_cas(storage, "ns", "k", 0, "b") == (False, 1)
    assert storage_cas(storage, "ns", "k", 1, "b") == (True, 2)
    assert storage.get("ns", "k") == "b"
    assert storage.version("ns", "missing") == 0


def test_storage_copies_values() -> None:
    storage = GlobalStorage()
    value = {"items": [1]}
    storage.put("ns", "k", value)
    value["items"].append(2)
    storage.get("ns", "k")["items"].append(3)
    assert storage.get("ns", "k") == {"items": [1]}


def test_cas_counter_is_linearizable() -> None:
    storage = GlobalStorage()
    storage.put("ns", "counter", 0)
    threads, increments = 8, 1000

    def work() -> None:
        for _ in range(increments):
            while True:
                current = storage.get_versioned("ns", "counter")
                assert current is not None
                if storage.cas("ns", "counter", current.version, current.value + 1).ok:
                    break

    workers = [threading.Thread(target=work) for _ in range(threads)]
    for worker in workers:
        worker.start()
    for worker in workers:
        worker.join()

    assert storage.get("ns", "counter") == threads * increments
    assert storage.version("ns", "counter") == threads * increments + 1


def test_descriptor_needs_a_description() -> None:
    with pytest.raises(InvalidToolSpec):
        ToolDescriptor("mystery", "  ", {}, ExecutorKind.BUILTIN, lambda arguments, ctx: Observation(content=""))


def test_registry_rejects_duplicates() -> None:
    registry = ToolRegistry([builtin_descriptor("echo")])
    with pytest.raises(NameCollision):
        registry.add(builtin_descriptor("echo"), agent="a")


def test_unknown_builtin() -> None:
    with pytest.raises(UnresolvedRef):
        builtin_descriptor("teleport")


def test_executor_failures_become_observations() -> None:
    def explode(arguments: Dict[str, Any], ctx: Any) -> Observation:
        raise OSError("disk on fire")

    registry = ToolRegistry([ToolDescriptor("burn", "Burn things.", {}, ExecutorKind.BUILTIN, explode)])
    observation = dispatch(context(CapabilityEnvironment(), registry=registry), "burn")
    assert observation.is_error
    assert observation.data == {"error": "tool_error", "tool": "burn", "message": "disk on fire"}


def test_build_registry_namespace(team_framework: FrameworkConfig) -> None:
    registry = build_registry(team_framework.root_agent, team_framework)
    assert registry.names == ["worker", "reviewer"]
    assert all(d.kind == ExecutorKind.SUB_AGENT for d in registry)
    assert registry.get("worker").input_schema["required"] == ["task"]

    delegated = dispatch(context(CapabilityEnvironment(), registry=registry), "worker", task="x")
    assert delegated.data["error"] == "delegation_unavailable"


def test_build_registry_adds_final_answer() -> None:
    framework = parse_framework(
        "name: f\nroot_agent:\n  name: a\n  system_prompt: p\n  model: m\n  termination: {mode: final-answer-tool}\n"
    )
    assert build_registry(framework.root_agent, framework).names == ["final_answer"]


def test_script_runner(tmp_path: Path) -> None:
    script = tmp_path / "upper.py"
    script.write_text(UPPER_SCRIPT, encoding="utf-8")
    observation = ScriptRunner(script, timeout=30).run({"text": "quiet"})
    assert observation == Observation(content="QUIET")


def test_script_runner_failures(tmp_path: Path) -> None:
    failing = tmp_path / "fail.py"
    failing.write_text("import sys\nprint('nope')\nsys.exit(3)\n", encoding="utf-8")
    observation = ScriptRunner(failing).run({})
    assert observation.data == {"error": "script_failed", "script": "fail.py", "exit_code": 3, "output": "nope"}

    slow = tmp_path / "slow.py"
    slow.write_text("import time\ntime.sleep(10)\n", encoding="utf-8")
    assert ScriptRunner(slow, timeout=0.5).run({}).data["error"] == "timeout"

    assert ScriptRunner(tmp_path / "missing.py").run({}).data["error"] == "script_not_found"


def test_script_timeout_holds_with_an_unread_large_input(tmp_path: Path) -> None:
    slow = tmp_path / "slow.py"
    slow.write_text("import time\ntime.sleep(8)\n", encoding="utf-8")
    started = time.monotonic()
    observation = ScriptRunner(slow, timeout=0.5).run({"blob": "x" * 300_000})
    assert observation.data["error"] == "timeout"
    assert time.monotonic() - started < 7


def test_script_exiting_without_reading_its_input(tmp_path: Path) -> None:
    quick = tmp_path / "quick.py"
    quick.write_text("print('done')\n", encoding="utf-8")
    assert ScriptRunner(quick, timeout=30).run({"blob": "x" * 300_000}) == Observation(content="done")


def test_script_timeout_from_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("NEX_SCRIPT_TIMEOUT", raising=False)
    assert script_timeout_from_env() == DEFAULT_SCRIPT_TIMEOUT
    monkeypatch.setenv("NEX_SCRIPT_TIMEOUT", "2.5")
    assert script_timeout_from_env() == 2.5
    monkeypatch.setenv("NEX_SCRIPT_TIMEOUT", "soon")
    assert script_timeout_from_env() == DEFAULT_SCRIPT_TIMEOUT


def test_script_tool_resolves_relative_to_the_config(write_tree: Callable[[Dict[str, str]], Path]) -> None:
    base = write_tree({"tools/upper.py": UPPER_SCRIPT})
    framework = parse_framework(
        "name: f\nroot_agent:\n  name: a\n  system_prompt: p\n  model: m\n  tools:\n"
        "    - name: shout\n      kind: custom-script\n      source: tools/upper.py\n      description: Shout a text.\n"
    )
    env = CapabilityEnvironment(base_dir=base, script_timeout=30)
    registry = build_registry(framework.root_agent, framework, env)
    assert dispatch(context(env, registry=registry), "shout", text="hey").content == "HEY"


@pytest.fixture
def skill_dir(write_tree: Callable[[Dict[str, str]], Path]) -> Path:
    base = write_tree(
        {
            "skills/counting/manifest.yaml": """
                name: counting
                tools:
                  - script: upper.py
                    description: Upper-case a text.
                    input_schema:
                      type: object
                      properties: {text: {type: string}}
                      required: [text]
            """,
            "skills/counting/prompt.md": "Count carefully.\n",
            "skills/counting/examples/01.md": "Q: how many words in 'a b'? A: 2\n",
            "skills/counting/scripts/upper.py": UPPER_SCRIPT,
        }
    )
    return base / "skills" / "counting"


def test_load_and_inject_skill(skill_dir: Path) -> None:
    skill = load_skill(skill_dir)
    assert skill.name == "counting"
    assert len(skill.few_shot_examples) == 1

    env = CapabilityEnvironment(script_timeout=30)
    ctx = context(env, registry=ToolRegistry())
    inject_skills(ctx, [skill, skill])

    assert ctx.messages[0].content.startswith("You help.\n\n## SKILL: counting\n\nCount carefully.")
    assert ctx.messages[0].content.count("## SKILL: counting") == 1
    assert "### Example 1" in ctx.messages[0].content
    assert ctx.registry.names == ["counting__upper"]
    assert ctx.registry.get("counting__upper").description == "Upper-case a text."
    assert dispatch(ctx, "counting__upper", text="abc").content == "ABC"


def test_inject_after_first_step_is_refused(skill_dir: Path) -> None:
    ctx = context(CapabilityEnvironment())
    ctx.iteration = 1
    with pytest.raises(RuntimeError):
        inject_skills(ctx, [load_skill(skill_dir)])


def test_invalid_skills(skill_dir: Path, tmp_path: Path) -> None:
    with pytest.raises(SkillLoadError):
        load_skill(tmp_path / "nowhere")

    (skill_dir / "prompt.md").write_text("   \n", encoding="utf-8")
    with pytest.raises(SkillLoadError):
        load_skill(skill_dir)

    (skill_dir / "prompt.md").write_text("Count.\n", encoding="utf-8")
    (skill_dir / "scripts" / "upper.py").unlink()
    with pytest.raises(SkillLoadError):
        load_skill(skill_dir)
