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
from pathlib import Path
from typing import List, Tuple

import pytest
from conftest import SIMPLE_FRAMEWORK, call
from hypothesis import given, settings
from hypothesis import strategies as st

from agentscale.config import FrameworkConfig, parse_framework
from agentscale.exceptions import DialectError, DialectSyntaxError, MixedDialectError, RecorderClosed, UnrepresentableFeature
from agentscale.gateway.models import ModelTurn
from agentscale.gateway.scripted import ScriptedGateway
from agentscale.runtime.engine import RunResult, run_agent
from agentscale.trajectory.dialects.registry import DIALECT_IDS, get_dialect
from agentscale.trajectory.events import EventKind, Trajectory, TrajectoryEvent, TrajectoryMetadata
from agentscale.trajectory.export import export_jsonl, export_records
from agentscale.trajectory.normalize import normalize, parse_back, semantically_equal, split_samples, transcode
from agentscale.trajectory.recorder import TrajectoryRecorder


@pytest.fixture
def team_run(team_framework: FrameworkConfig) -> RunResult:
    gateway = ScriptedGateway.from_paths(
        {
            "manager": [
                ModelTurn.call("Handing the notes over.", call("worker", task="write notes")),
                ModelTurn.answer("All done, the notes are in notes.md."),
            ],
            "manager/worker": [
                ModelTurn.call("Saving them.", call("fs_write", path="notes.md", content="first draft\nsecond line")),
                ModelTurn.call("", call("echo", msg="saved")),
                ModelTurn.answer("notes written"),
            ],
        }
    )
    return run_agent(team_framework, "Organise the notes", gateway)


def test_all_dialects_are_registered() -> None:
    assert sorted(DIALECT_IDS) == sorted(
        ["openai-json", "xml-inline", "xml-inline-multi", "xml-block", "bracket-fn", "markdown-json", "role-prefixed"]
    )
    with pytest.raises(DialectError):
        get_dialect("smoke-signals")


@pytest.mark.parametrize("dialect", DIALECT_IDS)
def test_round_trip_preserves_semantics(team_run: RunResult, dialect: str) -> None:
    text = normalize(team_run.trajectory, dialect)
    assert [path for path, _, _ in split_samples(text)] == [("manager",), ("manager", "worker")]
    assert semantically_equal(parse_back(text, dialect), team_run.trajectory)


# Plain words and line breaks, mixed with the markers the dialects reserve
MARKERS = [
    "<tool_call>",
    "</tool_call>",
    "</tool_response>",
    "</arguments>",
    "<thinking>",
    "```",
    "[fn(",
    "<|im_end|>",
    "CALL: ",
]
words = st.text(alphabet="abcdefxyz .,\n", max_size=20)
texts = st.lists(st.one_of(words, st.sampled_from(MARKERS)), max_size=4).map("".join)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(texts, texts), max_size=3), texts)
def test_random_runs_round_trip(steps: List[Tuple[str, str]], answer: str) -> None:
    turns = [ModelTurn.call(content, call("echo", msg=msg)) for content, msg in steps]
    gateway = ScriptedGateway.from_turns(*turns, ModelTurn.answer(answer))
    trajectory = run_agent(parse_framework(SIMPLE_FRAMEWORK), "Repeat after me", gateway).trajectory

    for dialect in DIALECT_IDS:
        try:
            text = normalize(trajectory, dialect)
        except UnrepresentableFeature:
            continue
        assert semantically_equal(parse_back(text, dialect), trajectory)


@pytest.mark.parametrize(
    "dialect, value",
    [
        ("xml-inline", "a</tool_call>b"),
        ("xml-inline-multi", "a</tool_call>b"),
        ("xml-block", "a</arguments>b"),
        ("markdown-json", "see ``` here"),
    ],
)
def test_reserved_markers_in_call_arguments(simple_framework: FrameworkConfig, dialect: str, value: str) -> None:
    gateway = ScriptedGateway.from_turns(
        ModelTurn.call("saving", call("fs_write", path="notes.md", content=value)),
        ModelTurn.answer("done"),
    )
    trajectory = run_agent(simple_framework, "write it", gateway).trajectory
    with pytest.raises(UnrepresentableFeature):
        normalize(trajectory, dialect)
    assert semantically_equal(parse_back(normalize(trajectory, "openai-json"), "openai-json"), trajectory)


@pytest.mark.parametrize("source, target", list(zip(DIALECT_IDS, DIALECT_IDS[1:] + DIALECT_IDS[:1])))
def test_transcode(team_run: RunResult, source: str, target: str) -> None:
    converted = transcode(normalize(team_run.trajectory, source), source, target)
    assert semantically_equal(parse_back(converted, target), team_run.trajectory)


def test_parallel_calls_are_not_representable_everywhere(simple_framework: FrameworkConfig) -> None:
    gateway = ScriptedGateway.from_turns(
        ModelTurn.call("both", call("echo", msg="a"), call("echo", msg="b")),
        ModelTurn.answer("done"),
    )
    trajectory = run_agent(simple_framework, "twice", gateway).trajectory
    with pytest.raises(UnrepresentableFeature):
        normalize(trajectory, "xml-inline")
    assert semantically_equal(parse_back(normalize(trajectory, "xml-inline-multi"), "xml-inline-multi"), trajectory)


@pytest.mark.parametrize(
    "dialect, content",
    [
        ("xml-inline", "look: <tool_call>"),
        ("markdown-json", "```python\nprint(1)\n```"),
        ("xml-block", "<thinking>hmm</thinking>"),
        ("bracket-fn", '[fn(name="echo", args={})]'),
        ("openai-json", "### context: root"),
    ],
)
def test_reserved_markers_fail_loudly(simple_framework: FrameworkConfig, dialect: str, content: str) -> None:
    trajectory = run_agent(simple_framework, "task", ScriptedGateway.from_turns(ModelTurn.answer(content))).trajectory
    if dialect == "openai-json":
        # Json strings can hold anything, only the sample header is a problem once the text is parsed back
        assert semantically_equal(parse_back(normalize(trajectory, dialect), dialect), trajectory)
        return
    with pytest.raises(UnrepresentableFeature):
        normalize(trajectory, dialect)


def test_syntax_errors_point_at_the_problem(team_run: RunResult) -> None:
    text = normalize(team_run.trajectory, "xml-inline")
    broken = text.replace("</tool_call>", "", 1)
    with pytest.raises(DialectSyntaxError) as e:
        parse_back(broken, "xml-inline")
    assert e.value.line > 1
    assert broken[e.value.offset :].startswith("<tool_call>")

    with pytest.raises(DialectSyntaxError) as e:
        parse_back("no header here\n", "role-prefixed")
    assert e.value.line == 1


def test_export_records(team_run: RunResult, tmp_path: Path) -> None:
    records = export_records(team_run.trajectory, "bracket-fn")
    assert [r["context_path"] for r in records] == ["manager", "manager/worker"]
    assert records[0]["metadata"]["status"] == "completed"
    assert [t["name"] for t in records[0]["metadata"]["tools"]] == ["worker", "reviewer"]
    assert len({r["sample_id"] for r in records}) == 2

    path = tmp_path / "export" / "bracket-fn.jsonl"
    assert export_jsonl([team_run.trajectory, team_run.trajectory], "bracket-fn", path) == 4
    lines = path.read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[0]) == records[0]

    assert export_jsonl([team_run.trajectory], ["bracket-fn", "bracket-fn"], path) == 2
    with pytest.raises(MixedDialectError):
        export_jsonl([team_run.trajectory], ["bracket-fn", "xml-block"], path)


def test_failed_export_keeps_the_previous_file(team_run: RunResult, simple_framework: FrameworkConfig, tmp_path: Path) -> None:
    path = tmp_path / "xml-inline.jsonl"
    assert export_jsonl([team_run.trajectory], "xml-inline", path) == 2
    previous = path.read_bytes()

    gateway = ScriptedGateway.from_turns(
        ModelTurn.call("both", call("echo", msg="a"), call("echo", msg="b")),
        ModelTurn.answer("done"),
    )
    parallel = run_agent(simple_framework, "twice", gateway).trajectory
    with pytest.raises(UnrepresentableFeature):
        export_jsonl([team_run.trajectory, parallel], "xml-inline", path)
    assert path.read_bytes() == previous
    assert [p.name for p in tmp_path.iterdir()] == ["xml-inline.jsonl"]


def test_recorder_lifecycle() -> None:
    recorder = TrajectoryRecorder(clock=lambda: 1.5)
    with pytest.raises(RecorderClosed):
        recorder.record(EventKind.USER_TASK, ("a",), {"content": "early"})

    recorder.open(TrajectoryMetadata(run_id="r"))
    with pytest.raises(RuntimeError):
        recorder.open(TrajectoryMetadata(run_id="again"))

    first = recorder.record(EventKind.SYSTEM_INIT, ("a",), {"content": "sys"})
    second = recorder.record(EventKind.RUN_END, ("a",), {"status": "completed", "final_answer": ""})
    assert (first.seq, second.seq) == (1, 2)
    assert recorder.finalized
    assert recorder.trajectory.metadata.status is not None

    with pytest.raises(RecorderClosed):
        recorder.record(EventKind.USER_TASK, ("a",), {"content": "late"})


def test_nesting_problems_are_reported() -> None:
    def event(seq: int, kind: EventKind, child: str) -> TrajectoryEvent:
        return TrajectoryEvent(seq=seq, run_id="r", context_path=("a",), kind=kind, payload={"child_path": ["a", child]})

    trajectory = Trajectory(events=[event(1, EventKind.DELEGATION_START, "b"), event(1, EventKind.DELEGATION_END, "c")])
    problems = trajectory.nesting_problems()
    assert len(problems) == 4


def test_digest_ignores_wall_time(team_run: RunResult) -> None:
    shifted = team_run.trajectory.model_copy(
        update={"events": [e.model_copy(update={"wall_time": e.wall_time + 100}) for e in team_run.trajectory.events]}
    )
    assert shifted.digest() == team_run.trajectory.digest()
