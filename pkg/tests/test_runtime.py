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
from typing import Any, Callable, Dict, List

import pytest
from conftest import call
from hypothesis import given, settings
from hypothesis import strategies as st

from agentscale.config import AgentSpec, FrameworkConfig, ToolKind, ToolRef, parse_framework
from agentscale.gateway.models import ModelTurn, Role
from agentscale.gateway.policy import PolicyGateway
from agentscale.gateway.scripted import ScriptedGateway
from agentscale.runtime.engine import AgentRuntime, derive_run_id, render_child_input, run_agent, step_agent
from agentscale.trajectory.events import EventKind, RunStatus, TrajectoryMetadata, read_events
from agentscale.trajectory.recorder import TrajectoryRecorder


def single(mode: str, max_iterations: int = 4) -> FrameworkConfig:
    return parse_framework(
        textwrap.dedent(
            f"""
            name: single
            root_agent:
              name: solo
              system_prompt: Work alone.
              model: default
              max_iterations: {max_iterations}
              termination: {{mode: {mode}}}
              tools:
                - {{name: echo, kind: builtin}}
            """
        )
    )


def kinds(result: Any, path: tuple) -> List[str]:
    return [e.kind.value for e in result.trajectory.events if e.context_path == path]


def test_no_tool_call_termination(scripted: Callable[..., ScriptedGateway]) -> None:
    gateway = scripted(ModelTurn.call("checking", call("echo", msg="ping")), ModelTurn.answer("pong received"))
    result = run_agent(single("no-tool-call"), "ping it", gateway)

    assert result.status == RunStatus.COMPLETED
    assert result.final_answer == "pong received"
    assert result.iterations == 2
    assert kinds(result, ("solo",)) == [
        "system_init",
        "user_task",
        "model_turn",
        "tool_call",
        "tool_result",
        "model_turn",
        "run_end",
    ]
    assert result.trajectory.status == RunStatus.COMPLETED
    assert result.trajectory.final_answer == "pong received"


def test_final_answer_tool_termination(scripted: Callable[..., ScriptedGateway]) -> None:
    gateway = scripted(
        ModelTurn.answer("thinking out loud"),
        ModelTurn.call("done", call("final_answer", answer="42")),
    )
    result = run_agent(single("final-answer-tool"), "compute", gateway)
    assert result.status == RunStatus.COMPLETED
    assert result.final_answer == "42"
    assert result.iterations == 2


def test_malformed_final_answer_does_not_terminate(scripted: Callable[..., ScriptedGateway]) -> None:
    gateway = scripted(
        ModelTurn.call("oops", call("final_answer", text="42")),
        ModelTurn.call("again", call("final_answer", answer="42")),
    )
    result = run_agent(single("final-answer-tool"), "compute", gateway)
    assert result.final_answer == "42"
    assert result.iterations == 2


def test_max_iterations_only(scripted: Callable[..., ScriptedGateway]) -> None:
    turns = [ModelTurn.answer(f"turn {i}") for i in range(3)]
    result = run_agent(single("max-iterations-only", max_iterations=3), "loop", scripted(*turns))
    assert result.status == RunStatus.COMPLETED
    assert result.iterations == 3
    assert result.final_answer == "turn 2"


def test_max_iterations_exhausted(scripted: Callable[..., ScriptedGateway]) -> None:
    turns = [ModelTurn.call(f"turn {i}", call("echo", msg=str(i))) for i in range(3)]
    result = run_agent(single("no-tool-call", max_iterations=3), "loop", scripted(*turns))
    assert result.status == RunStatus.MAX_ITERATIONS_EXHAUSTED
    assert result.iterations == 3
    assert result.final_answer == "turn 2"


def test_tool_errors_do_not_stop_the_run(scripted: Callable[..., ScriptedGateway]) -> None:
    gateway = scripted(ModelTurn.call("try", call("teleport", to="mars")), ModelTurn.answer("gave up"))
    result = run_agent(single("no-tool-call"), "travel", gateway)
    assert result.status == RunStatus.COMPLETED
    tool_results = [e for e in result.trajectory.events if e.kind == EventKind.TOOL_RESULT]
    assert tool_results[0].payload["is_error"]


def test_delegation_isolation(team_framework: FrameworkConfig) -> None:
    gateway = ScriptedGateway.from_paths(
        {
            "manager": [ModelTurn.call("handing over", call("worker", task="write notes")), ModelTurn.answer("all done")],
            "manager/worker": [
                ModelTurn.call("saving", call("fs_write", path="notes.md", content="secret detail")),
                ModelTurn.answer("notes written"),
            ],
        }
    )
    result = run_agent(team_framework, "organise", gateway, seed=7)

    assert result.status == RunStatus.COMPLETED
    assert result.final_answer == "all done"
    assert result.run_id == derive_run_id(team_framework, "organise", 7)

    contexts = result.trajectory.contexts()
    assert list(contexts) == [("manager",), ("manager", "worker")]

    worker = contexts[("manager", "worker")]
    assert [m.role for m in worker[:2]] == [Role.SYSTEM, Role.USER]
    assert worker[1].content == render_child_input({"task": "write notes"}) == 'TASK:\n{"task":"write notes"}'
    assert all("organise" not in m.content for m in worker)

    manager = contexts[("manager",)]
    assert [m.role for m in manager] == [Role.SYSTEM, Role.USER, Role.ASSISTANT, Role.TOOL, Role.ASSISTANT]
    assert manager[3].content == "notes written"
    assert all("secret detail" not in m.content for m in manager)

    inits = [e for e in result.trajectory.events if e.kind == EventKind.SYSTEM_INIT]
    init = next(e for e in inits if e.context_path == ("manager", "worker"))
    assert init.payload["run_id"] == f"{result.run_id}/worker"
    assert result.trajectory.nesting_problems() == []


def test_repeated_delegation_gets_numbered_paths(team_framework: FrameworkConfig) -> None:
    gateway = ScriptedGateway.from_paths(
        {
            "manager": [
                ModelTurn.call("twice", call("worker", task="one"), call("worker", task="two")),
                ModelTurn.answer("both done"),
            ],
            "manager/worker": [ModelTurn.answer("first")],
            "manager/worker#2": [ModelTurn.answer("second")],
        }
    )
    result = run_agent(team_framework, "organise", gateway)
    assert result.trajectory.context_paths() == [("manager",), ("manager", "worker"), ("manager", "worker#2")]
    results = [e.payload["content"] for e in result.trajectory.events if e.kind == EventKind.TOOL_RESULT]
    assert results == ["first", "second"]


def test_script_exhausted_in_a_child_aborts_the_run(team_framework: FrameworkConfig) -> None:
    gateway = ScriptedGateway.from_paths({"manager": [ModelTurn.call("go", call("worker", task="x"))]})
    result = run_agent(team_framework, "organise", gateway)

    assert result.status == RunStatus.ABORTED
    assert result.error_kind == "ScriptExhausted"
    assert result.trajectory.nesting_problems() == []
    end = next(e for e in result.trajectory.events if e.kind == EventKind.DELEGATION_END)
    assert end.payload["status"] == "aborted"
    assert "error" in end.payload
    assert result.trajectory.events[-1].kind == EventKind.RUN_END


def test_context_creation_failure_aborts_only_the_child(tmp_path: Path) -> None:
    framework = parse_framework(
        textwrap.dedent(
            """
            name: skilled
            root_agent:
              name: boss
              system_prompt: Delegate.
              model: default
              sub_agents:
                - name: expert
                  system_prompt: Know things.
                  model: default
                  skills: [skills/absent]
            """
        )
    )
    gateway = ScriptedGateway.from_paths(
        {"boss": [ModelTurn.call("ask", call("expert", task="help")), ModelTurn.answer("did it myself")]}
    )
    result = run_agent(framework, "help", gateway, base_dir=tmp_path)

    assert result.status == RunStatus.COMPLETED
    observation = next(e for e in result.trajectory.events if e.kind == EventKind.TOOL_RESULT)
    assert observation.payload["is_error"]
    assert '"delegation_failed"' in observation.payload["content"]
    assert ("boss", "expert") not in result.trajectory.contexts()


def test_events_are_mirrored_to_the_run_dir(simple_framework: FrameworkConfig, runs_dir: Path) -> None:
    recorder = TrajectoryRecorder(run_dir=runs_dir / "r1", clock=lambda: 0.0)
    result = run_agent(simple_framework, "say hi", PolicyGateway(), recorder)
    assert read_events(runs_dir / "r1" / "events.jsonl") == result.trajectory.events


def test_runtime_drives_a_single_run(simple_framework: FrameworkConfig, scripted: Callable[..., ScriptedGateway]) -> None:
    runtime = AgentRuntime(simple_framework, scripted(ModelTurn.answer("a"), ModelTurn.answer("b")))
    runtime.run("first")
    with pytest.raises(RuntimeError):
        runtime.run("second")


def test_step_agent(simple_framework: FrameworkConfig, scripted: Callable[..., ScriptedGateway]) -> None:
    runtime = AgentRuntime(simple_framework, scripted(ModelTurn.call("x", call("echo", msg="m")), ModelTurn.answer("y")))
    runtime.recorder.open(TrajectoryMetadata(run_id="manual"))
    ctx = runtime.new_context(simple_framework.root_agent, "task", run_id="manual", context_path=("assistant",))

    assert not step_agent(ctx).terminated
    outcome = step_agent(ctx)
    assert outcome.terminated
    assert outcome.final_answer == "y"
    assert [m.role for m in ctx.messages] == [Role.SYSTEM, Role.USER, Role.ASSISTANT, Role.TOOL, Role.ASSISTANT]
    assert ctx.messages[3].tool_call_id == ctx.messages[2].tool_calls[0].id == "call_1"


@st.composite
def agent_trees(draw: st.DrawFn) -> FrameworkConfig:
    size = draw(st.integers(1, 8))
    parents = [-1]
    for i in range(1, size):
        candidates = [p for p in range(i) if parents.count(p) < 4]
        parents.append(draw(st.sampled_from(candidates)))

    def build(index: int) -> AgentSpec:
        children: List[Any] = [build(child) for child in range(size) if parents[child] == index]
        return AgentSpec(
            name=f"agent_{index}",
            system_prompt=f"You are agent {index}.",
            model="default",
            max_iterations=10,
            tools=[ToolRef(name="echo", kind=ToolKind.BUILTIN)],
            sub_agents=children,
        )

    return FrameworkConfig(name="random_tree", root_agent=build(0))


@settings(max_examples=40, deadline=None)
@given(agent_trees(), st.integers(0, 2**16))
def test_policy_delegation_follows_the_config_tree(framework: FrameworkConfig, seed: int) -> None:
    result = run_agent(framework, "do the thing", PolicyGateway(seed=seed), seed=seed)

    assert result.status == RunStatus.COMPLETED
    assert result.trajectory.nesting_problems() == []
    assert result.trajectory.dangling_calls() == []
    assert sorted(result.trajectory.context_paths()) == sorted(path for path, _ in framework.iter_nodes())

    again = run_agent(framework, "do the thing", PolicyGateway(seed=seed), seed=seed)
    assert again.trajectory.digest() == result.trajectory.digest()


def test_sub_agent_tools_delegate_too(scripted: Callable[..., ScriptedGateway]) -> None:
    framework = parse_framework(
        textwrap.dedent(
            """
            name: tooled
            root_agent:
              name: lead
              system_prompt: Lead.
              model: default
              tools:
                - {name: ask_helper, kind: sub-agent, source: helper, description: Ask the helper.}
            agents:
              - {name: helper, system_prompt: Help., model: default}
            """
        )
    )
    gateway = scripted(
        ModelTurn.call("asking", call("ask_helper", task="q")), ModelTurn.answer("helped"), ModelTurn.answer("thanks")
    )
    result = run_agent(framework, "task", gateway)
    assert result.final_answer == "thanks"
    assert result.trajectory.context_paths() == [("lead",), ("lead", "helper")]


def test_run_summary_excludes_the_trajectory(simple_framework: FrameworkConfig) -> None:
    summary: Dict[str, Any] = run_agent(simple_framework, "hi", PolicyGateway()).summary()
    assert "trajectory" not in summary
    assert summary["status"] == "completed"


@st.composite
def shallow_trees(draw: st.DrawFn) -> FrameworkConfig:
    size = draw(st.integers(2, 10))
    parents, depths = [-1], [1]
    for i in range(1, size):
        candidates = [p for p in range(i) if depths[p] < 3 and parents.count(p) < 4]
        parent = draw(st.sampled_from(candidates))
        parents.append(parent)
        depths.append(depths[parent] + 1)

    def build(index: int) -> AgentSpec:
        return AgentSpec(
            name=f"agent_{index}",
            system_prompt=f"You are agent {index}.",
            model="default",
            max_iterations=10,
            tools=[ToolRef(name="echo", kind=ToolKind.BUILTIN)],
            sub_agents=[build(child) for child in range(size) if parents[child] == index],
        )

    return FrameworkConfig(name="shallow_tree", root_agent=build(0))


@pytest.mark.slow
@settings(max_examples=1000, deadline=None)
@given(shallow_trees(), st.integers(0, 2**16))
def test_parents_only_see_delegation_results(framework: FrameworkConfig, seed: int) -> None:
    result = run_agent(framework, "split the work", PolicyGateway(seed=seed), seed=seed)
    events = result.trajectory.events

    for path, messages in result.trajectory.contexts().items():
        prefix = f"[{'/'.join(path)}]"
        assert all(m.content.startswith(prefix) for m in messages if m.role == Role.ASSISTANT)

    starts = [e for e in events if e.kind == EventKind.DELEGATION_START]
    assert len(starts) == framework.node_count - 1
    assert len([e for e in events if e.kind == EventKind.DELEGATION_END]) == len(starts)
    for start in starts:
        results = [
            e
            for e in events
            if e.kind == EventKind.TOOL_RESULT
            and e.context_path == start.context_path
            and e.payload["id"] == start.payload["call_id"]
        ]
        assert len(results) == 1
