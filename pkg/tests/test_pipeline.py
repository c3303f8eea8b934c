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
import textwrap
from pathlib import Path
from typing import Callable

import pytest

from agentscale.cli.pipeline import PipelineManifest, Stage, parse_manifest, run_pipeline
from agentscale.exceptions import ConfigSyntaxError, SchemaError

Manifest = Callable[..., PipelineManifest]

FULL_MANIFEST = """
nexau_pipeline: 1
stages: [build, synth, run, assess, export]
seed: 11
parallelism: {parallelism}
output_root: {output_root}
build:
  n_frameworks: 5
synth:
  queries_per_framework: 2
  difficulty_mix: "2:1:1"
run:
  backend: policy
export:
  dialects: [openai-json, xml-inline-multi, role-prefixed]
"""


@pytest.fixture
def manifest(tmp_path: Path) -> Manifest:
    def build(parallelism: int = 1, output_root: str = "out") -> PipelineManifest:
        return parse_manifest(FULL_MANIFEST.format(parallelism=parallelism, output_root=output_root), base_dir=tmp_path)

    return build


def count_lines(path: Path) -> int:
    return len(path.read_text(encoding="utf-8").splitlines())


def test_manifest_defaults() -> None:
    manifest = parse_manifest("nexau_pipeline: 1\n")
    assert manifest.stages == []
    assert manifest.parallelism == 1
    assert manifest.export.dialects == ["openai-json"]
    assert manifest.run.backend == "policy"


def test_stages_run_in_dependency_order() -> None:
    manifest = parse_manifest("stages: [export, run, synth, build]\n")
    assert manifest.stages == [Stage.BUILD, Stage.SYNTH, Stage.RUN, Stage.EXPORT]


@pytest.mark.parametrize(
    "document",
    [
        "stages: [run]\n",
        "stages: [build, synth, export]\n",
        "stages: [build, build]\n",
        "stages: [build, compile]\n",
        "export: {dialects: [openai-json, yaml-ish]}\n",
        "run: {backend: oracle}\n",
        "synth: {difficulty_mix: '1:1'}\n",
        "parallelism: 0\n",
        "build: {n_frameworks: 2, colour: blue}\n",
        "nexau_pipeline: 2\n",
        "- build\n",
    ],
)
def test_invalid_manifests(document: str) -> None:
    with pytest.raises(SchemaError):
        parse_manifest(document)


def test_manifest_syntax_error() -> None:
    with pytest.raises(ConfigSyntaxError):
        parse_manifest("stages: [build\n")


def test_empty_pipeline(tmp_path: Path) -> None:
    summary = run_pipeline(parse_manifest("nexau_pipeline: 1\n", base_dir=tmp_path))
    assert summary.runs_completed == 0
    assert not (tmp_path / "out").exists()


def test_full_pipeline(manifest: Manifest, tmp_path: Path) -> None:
    summary = run_pipeline(manifest())
    out = tmp_path / "out"

    assert summary.frameworks_built + summary.frameworks_failed == 5
    assert summary.frameworks_built > 0
    assert summary.queries_synthesized + summary.queries_failed == 2 * summary.frameworks_built
    assert summary.runs_completed + summary.runs_failed == summary.queries_synthesized
    assert summary.runs_completed > 0

    assert len(list((out / "frameworks").glob("*/framework.yaml"))) == summary.frameworks_built
    assert count_lines(out / "queries.jsonl") == summary.queries_synthesized

    trajectories = count_lines(out / "trajectories.jsonl")
    assert summary.trajectories_kept + summary.trajectories_dropped == trajectories
    assert len(list((out / "reports").glob("*.json"))) == trajectories

    assert set(summary.samples_exported) == {"openai-json", "xml-inline-multi", "role-prefixed"}
    for dialect, count in summary.samples_exported.items():
        export = out / "export" / f"{dialect}.jsonl"
        assert count_lines(export) == count
        for line in export.read_text(encoding="utf-8").splitlines():
            record = json.loads(line)
            assert record["dialect"] == dialect

    written = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert written["runs_completed"] == summary.runs_completed
    assert written["samples_exported"] == summary.samples_exported


@pytest.mark.slow
def test_exports_do_not_depend_on_parallelism(manifest: Manifest, tmp_path: Path) -> None:
    sequential = run_pipeline(manifest(parallelism=1, output_root="sequential"))
    parallel = run_pipeline(manifest(parallelism=8, output_root="parallel"))
    assert sequential.model_dump(exclude={"failures"}) == parallel.model_dump(exclude={"failures"})
    assert len(sequential.failures) == len(parallel.failures)

    for name in [f"export/{dialect}.jsonl" for dialect in sequential.samples_exported] + ["queries.jsonl"]:
        assert (tmp_path / "sequential" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()


def test_resume_reuses_finished_runs(manifest: Manifest, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    first = run_pipeline(manifest())
    exported = (tmp_path / "out" / "export" / "openai-json.jsonl").read_bytes()

    caplog.clear()
    with caplog.at_level(logging.INFO, logger="agentscale.cli.runs"):
        second = run_pipeline(manifest())

    resumed = [r for r in caplog.records if "already done" in r.getMessage()]
    assert len(resumed) == len(list((tmp_path / "out" / "runs").glob("*/result.json")))
    assert len(resumed) == first.runs_completed + first.runs_failed
    assert second.model_dump(exclude={"failures"}) == first.model_dump(exclude={"failures"})
    assert (tmp_path / "out" / "export" / "openai-json.jsonl").read_bytes() == exported


def test_export_without_assessment(tmp_path: Path) -> None:
    document = textwrap.dedent(
        """
        stages: [build, synth, run, export]
        build: {n_frameworks: 2}
        synth: {queries_per_framework: 1, fuzzify: false}
        export: {dialects: [bracket-fn]}
        """
    )
    summary = run_pipeline(parse_manifest(document, base_dir=tmp_path))

    assert summary.trajectories_kept == summary.trajectories_dropped == 0
    assert not (tmp_path / "out" / "reports").exists()
    # Every trajectory is exported when nothing was assessed
    runs = count_lines(tmp_path / "out" / "trajectories.jsonl")
    assert runs > 0
    assert summary.samples_exported["bracket-fn"] >= runs
