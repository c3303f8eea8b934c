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
from pathlib import Path
from typing import Callable, Dict, Iterator, List

import pytest
from click.testing import CliRunner, Result
from conftest import SIMPLE_FRAMEWORK, TEAM_FRAMEWORK, call

from agentscale.cli.main import main
from agentscale.cli.runs import EXIT_GATEWAY, EXIT_OK, EXIT_VALIDATION
from agentscale.config import FrameworkConfig, load_framework
from agentscale.gateway.models import ModelTurn
from agentscale.gateway.policy import PolicyGateway
from agentscale.gateway.scripted import Script, ScriptedCall, ScriptedGateway, ScriptedTurn, dump_script
from agentscale.runtime.engine import run_agent
from agentscale.trajectory.normalize import normalize, parse_back, semantically_equal

Invoke = Callable[..., Result]


@pytest.fixture(autouse=True)
def restore_logging() -> Iterator[None]:
    # Every invocation points the root logger at the runner's stderr
    handlers = list(logging.root.handlers)
    level = logging.root.level
    yield
    logging.root.handlers = handlers
    logging.root.setLevel(level)


@pytest.fixture
def invoke() -> Invoke:
    runner = CliRunner()

    def run(*args: str) -> Result:
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return run


@pytest.fixture
def frameworks(write_tree: Callable[[Dict[str, str]], Path]) -> Path:
    broken_team = TEAM_FRAMEWORK.replace("- worker", "- ghost")
    return write_tree({"simple.yaml": SIMPLE_FRAMEWORK, "team.yaml": TEAM_FRAMEWORK, "broken.yaml": broken_team})


def test_validate(invoke: Invoke, frameworks: Path) -> None:
    result = invoke("validate", frameworks / "team.yaml")
    assert result.exit_code == EXIT_OK
    assert '"node_count": 3' in result.output
    assert '"valid": true' in result.output

    result = invoke("validate", frameworks / "broken.yaml")
    assert result.exit_code == EXIT_VALIDATION
    assert "[ref_resolves]" in result.output


def test_run_with_policy_backend(invoke: Invoke, frameworks: Path, tmp_path: Path) -> None:
    runs = tmp_path / "runs"
    result = invoke("run", frameworks / "simple.yaml", "Write a short note", "--runs-dir", runs, "--seed", "3")
    assert result.exit_code == EXIT_OK
    assert '"status": "completed"' in result.output

    run_dirs = list(runs.iterdir())
    assert len(run_dirs) == 1
    assert (run_dirs[0] / "events.jsonl").exists()
    record = json.loads((run_dirs[0] / "result.json").read_text(encoding="utf-8"))
    assert record["result"]["run_id"] == run_dirs[0].name
    assert record["result"]["status"] == "completed"


def test_run_exit_codes(invoke: Invoke, frameworks: Path, tmp_path: Path) -> None:
    first = ScriptedTurn(content="Echoing first.", tool_calls=[ScriptedCall(name="echo", arguments={"msg": "hi"})])
    script = Script(turns=[first])
    script_file = tmp_path / "script.yaml"
    script_file.write_text(dump_script(script), encoding="utf-8")

    # The script runs out of turns after the first call
    result = invoke(
        "run", frameworks / "simple.yaml", "Say hi", "--backend", "scripted", "--script", script_file, "--runs-dir", tmp_path
    )
    assert result.exit_code == EXIT_GATEWAY
    assert "ScriptExhausted" in result.output

    result = invoke("run", frameworks / "simple.yaml", "Say hi", "--backend", "scripted", "--runs-dir", tmp_path)
    assert result.exit_code == EXIT_VALIDATION
    assert "needs a script file" in result.output

    result = invoke("run", frameworks / "broken.yaml", "Say hi", "--runs-dir", tmp_path)
    assert result.exit_code == EXIT_VALIDATION


def test_convert(invoke: Invoke, team_framework: FrameworkConfig, tmp_path: Path) -> None:
    trajectory = run_agent(team_framework, "Prepare the release notes", PolicyGateway(1)).trajectory
    source = tmp_path / "run.xml-inline.txt"
    source.write_text(normalize(trajectory, "xml-inline"), encoding="utf-8")
    target = tmp_path / "run.bracket-fn.txt"

    result = invoke("convert", "--from", "xml-inline", "--to", "bracket-fn", source, target)
    assert result.exit_code == EXIT_OK
    assert semantically_equal(parse_back(target.read_text(encoding="utf-8"), "bracket-fn"), trajectory)

    broken = tmp_path / "broken.txt"
    broken.write_text(source.read_text(encoding="utf-8").replace("</tool_call>", "", 1), encoding="utf-8")
    result = invoke("convert", "--from", "xml-inline", "--to", "bracket-fn", broken, tmp_path / "out.txt")
    assert result.exit_code == EXIT_VALIDATION
    assert "DialectSyntaxError" in result.output

    result = invoke("convert", "--from", "xml-inline", "--to", "yaml-ish", source, tmp_path / "out.txt")
    assert result.exit_code != EXIT_OK


def test_assess(invoke: Invoke, simple_framework: FrameworkConfig, tmp_path: Path) -> None:
    bad = ScriptedGateway.from_turns(
        ModelTurn.call("Reading the notes.", call("fs_read", path="missing.md")),
        ModelTurn.call("Writing a stub.", call("echo", msg="TODO: fill in later")),
        ModelTurn.answer("done"),
    )
    good = ScriptedGateway.from_turns(ModelTurn.call("Echoing.", call("echo", msg="hello")), ModelTurn.answer("hello"))
    trajectories: List[str] = [
        run_agent(simple_framework, "Summarize the notes", bad).trajectory.model_dump_json(),
        run_agent(simple_framework, "Say hello", good).trajectory.model_dump_json(),
    ]
    source = tmp_path / "trajectories.jsonl"
    source.write_text("\n".join(trajectories) + "\n", encoding="utf-8")
    reports = tmp_path / "reports"

    result = invoke("assess", "--in", source, "--report", reports, "--batch", "4")
    assert result.exit_code == EXIT_OK
    assert '"trajectories_kept": 1' in result.output
    assert '"trajectories_dropped": 1' in result.output
    assert len(list(reports.glob("*.json"))) == 2

    source.write_text("not a trajectory\n", encoding="utf-8")
    assert invoke("assess", "--in", source, "--report", reports).exit_code == EXIT_VALIDATION


def test_build_framework(invoke: Invoke, tmp_path: Path) -> None:
    out = tmp_path / "frameworks"
    result = invoke("build-framework", "--description", "A CTO delegating to a software engineer.", "--out", out)
    assert result.exit_code == EXIT_OK

    configs = list(out.glob("*/framework.yaml"))
    assert len(configs) == 1
    assert load_framework(configs[0]).node_count == 2

    result = invoke("build-framework", "--corpus", "3", "--seed", "5", "--out", out)
    assert result.exit_code == EXIT_OK
    assert len(list(out.glob("*/framework.yaml"))) >= 2

    assert invoke("build-framework", "--out", out).exit_code == EXIT_VALIDATION


def test_synth_queries(invoke: Invoke, frameworks: Path, tmp_path: Path) -> None:
    out = tmp_path / "queries.jsonl"
    tree_out = tmp_path / "tree.yaml"
    result = invoke(
        "synth-queries",
        "--framework",
        frameworks / "simple.yaml",
        "--framework",
        frameworks / "team.yaml",
        "--n",
        "6",
        "--seed",
        "2",
        "--fuzzify",
        "--out",
        out,
        "--tree-out",
        tree_out,
    )
    assert result.exit_code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 6
    assert all(json.loads(line)["text"] for line in lines)
    assert tree_out.exists()

    result = invoke("synth-queries", "--framework", frameworks / "simple.yaml", "--difficulty-mix", "1:x:1", "--out", out)
    assert result.exit_code == EXIT_VALIDATION


def test_gen_trajectories(invoke: Invoke, tmp_path: Path) -> None:
    manifest = tmp_path / "manifest.yaml"
    manifest.write_text(
        "nexau_pipeline: 1\n"
        "stages: [build, synth, run, export]\n"
        "build: {n_frameworks: 2}\n"
        "synth: {queries_per_framework: 1}\n"
        "export: {dialects: [openai-json, role-prefixed]}\n",
        encoding="utf-8",
    )
    result = invoke("gen-trajectories", manifest)
    assert result.exit_code == EXIT_OK
    summary = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert summary["frameworks_built"] + summary["frameworks_failed"] == 2
    assert set(summary["samples_exported"]) == {"openai-json", "role-prefixed"}

    manifest.write_text("nexau_pipeline: 1\nstages: [run]\n", encoding="utf-8")
    assert invoke("gen-trajectories", manifest).exit_code == EXIT_VALIDATION
