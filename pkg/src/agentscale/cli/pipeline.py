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

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from agentscale.capabilities.storage import GlobalStorage
from agentscale.cli.runs import BACKENDS, execute_run, make_gateway
from agentscale.config.parser import serialize_framework
from agentscale.config.schema import FrameworkConfig
from agentscale.exceptions import AgentScaleError, DialectError, SchemaError
from agentscale.helpers.utils import derive_seed, load_document
from agentscale.quality.judges import RuleJudge, assess_iteratively
from agentscale.quality.report import IssueReport, Verdict
from agentscale.quality.taxonomy import Severity, load_issue_taxonomy
from agentscale.queries.models import FrameworkContext, SynthesizedQuery
from agentscale.queries.personas import load_personas
from agentscale.queries.pipeline import parse_difficulty_mix, sample_conditionings, synthesize_batch
from agentscale.queries.taxonomy import dump_tree, load_tree
from agentscale.runtime.engine import RunResult
from agentscale.synthesis.backend import TemplateBackend
from agentscale.synthesis.builder import FrameworkBuild, FrameworkBuilder
from agentscale.synthesis.corpus import seed_descriptions
from agentscale.synthesis.models import FrameworkDescription
from agentscale.trajectory.dialects.registry import DIALECT_IDS
from agentscale.trajectory.events import RunStatus, Trajectory
from agentscale.trajectory.export import export_records

LOGGER = logging.getLogger(__name__)

HEADER_KEY = "nexau_pipeline"
PIPELINE_VERSION = 1

T = TypeVar("T")
R = TypeVar("R")


class Stage(str, enum.Enum):
    BUILD = "build"
    SYNTH = "synth"
    RUN = "run"
    ASSESS = "assess"
    EXPORT = "export"


STAGE_ORDER = list(Stage)

# The stages a stage consumes the output of
REQUIRES = {
    Stage.BUILD: [],
    Stage.SYNTH: [Stage.BUILD],
    Stage.RUN: [Stage.SYNTH],
    Stage.ASSESS: [Stage.RUN],
    Stage.EXPORT: [Stage.RUN],
}


class StageOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BuildOptions(StageOptions):
    n_frameworks: int = Field(default=5, ge=0)
    smoke: bool = True


class SynthOptions(StageOptions):
    queries_per_framework: int = Field(default=2, ge=0)
    difficulty_mix: str = "1:1:1"
    tree: Optional[str] = None
    personas: Optional[str] = None
    ground: bool = False
    fuzzify: bool = True

    @field_validator("difficulty_mix")
    @classmethod
    def _valid_mix(cls, value: str) -> str:
        parse_difficulty_mix(value)
        return value


class RunOptions(StageOptions):
    backend: str = "policy"
    script: Optional[str] = None

    @field_validator("backend")
    @classmethod
    def _known_backend(cls, value: str) -> str:
        if value not in BACKENDS:
            raise ValueError(f"unknown backend {value!r}, expected one of {list(BACKENDS)}")
        return value


class AssessOptions(StageOptions):
    batch_size: int = Field(default=20, ge=1)
    drop_threshold: Severity = Severity.MAJOR
    taxonomy: Optional[str] = None


class ExportOptions(StageOptions):
    dialects: List[str] = Field(default_factory=lambda: ["openai-json"])

    @field_validator("dialects")
    @classmethod
    def _known_dialects(cls, value: List[str]) -> List[str]:
        unknown = [d for d in value if d not in DIALECT_IDS]
        if unknown:
            raise ValueError(f"unknown dialect(s) {unknown}, expected some of {DIALECT_IDS}")
        return value


class PipelineManifest(BaseModel):
    """
    What a batch generation does: which stages, with which options, how many workers and where to.
    Relative paths are resolved against base_dir, the directory of the manifest file.
    """

    model_config = ConfigDict(extra="forbid")

    stages: List[Stage] = Field(default_factory=list)
    seed: int = 0
    parallelism: int = Field(default=1, ge=1)
    output_root: str = "out"
    build: BuildOptions = Field(default_factory=BuildOptions)
    synth: SynthOptions = Field(default_factory=SynthOptions)
    run: RunOptions = Field(default_factory=RunOptions)
    assess: AssessOptions = Field(default_factory=AssessOptions)
    export: ExportOptions = Field(default_factory=ExportOptions)
    base_dir: str = Field(default=".", exclude=True)

    @model_validator(mode="after")
    def _stages_consistent(self) -> "PipelineManifest":
        if len(set(self.stages)) != len(self.stages):
            raise ValueError(f"stages are listed more than once: {[s.value for s in self.stages]}")
        for stage in self.stages:
            missing = [r.value for r in REQUIRES[stage] if r not in self.stages]
            if missing:
                raise ValueError(f"stage {stage.value} needs the stage(s) {missing}")
        # Whatever the order they are listed in, stages run in dependency order
        self.stages = [stage for stage in STAGE_ORDER if stage in self.stages]
        return self

    def resolve(self, path: Optional[str]) -> Optional[Path]:
        if path is None:
            return None
        return Path(self.base_dir) / path

    @property
    def output_dir(self) -> Path:
        return Path(self.base_dir) / self.output_root


def parse_manifest(document: str, base_dir: Optional[Path] = None) -> PipelineManifest:
    """
    :raises ConfigSyntaxError: The document is not valid yaml
    :raises SchemaError: The document is not a valid manifest
    """
    data = load_document(document, HEADER_KEY, PIPELINE_VERSION, "pipeline")
    try:
        return PipelineManifest.model_validate({**data, "base_dir": str(base_dir or Path("."))})
    except ValidationError as e:
        raise SchemaError(f"Invalid pipeline manifest: {e}")


def load_manifest(path: Path) -> PipelineManifest:
    return parse_manifest(path.read_text(encoding="utf-8"), base_dir=path.parent)


class PipelineSummary(BaseModel):
    frameworks_built: int = 0
    frameworks_failed: int = 0
    queries_synthesized: int = 0
    queries_failed: int = 0
    runs_completed: int = 0
    runs_failed: int = 0
    samples_exported: Dict[str, int] = Field(default_factory=dict)
    trajectories_kept: int = 0
    trajectories_dropped: int = 0
    failures: List[str] = Field(default_factory=list)


def pool_map(fn: Callable[[T], R], items: Sequence[T], parallelism: int) -> List[R]:
    """
    Apply fn to every item on a worker pool, results come back in the order of the items.
    """
    if parallelism <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, items))


class Pipeline:
    """
    Run the stages of a manifest one after the other.  A stage is a barrier: it starts once the previous
    one is done for every unit.  Within a stage, units are independent and a failing unit is only recorded
    in the summary.
    """

    def __init__(self, manifest: PipelineManifest) -> None:
        self.manifest = manifest
        self.out = manifest.output_dir
        self.summary = PipelineSummary()
        self.storage = GlobalStorage()
        self.frameworks: List[FrameworkConfig] = []
        self.queries: List[SynthesizedQuery] = []
        self.results: List[RunResult] = []
        self.reports: Dict[str, IssueReport] = {}

    def fail(self, message: str) -> None:
        LOGGER.warning(message)
        self.summary.failures.append(message)

    def framework_dir(self, framework: FrameworkConfig) -> Path:
        return self.out / "frameworks" / framework.name

    def build(self) -> None:
        options = self.manifest.build
        seed = self.manifest.seed
        descriptions = seed_descriptions(options.n_frameworks, seed)
        gen = TemplateBackend(seed)

        def work(desc: FrameworkDescription) -> Tuple[Optional[FrameworkBuild], str]:
            try:
                return FrameworkBuilder(gen, seed=seed, smoke=options.smoke).build(desc), ""
            except AgentScaleError as e:
                return None, f"build of {desc.text!r} failed: {e}"

        for build, error in pool_map(work, descriptions, self.manifest.parallelism):
            if build is None:
                self.summary.frameworks_failed += 1
                self.fail(error)
                continue

            directory = self.framework_dir(build.config)
            (directory / "tools").mkdir(parents=True, exist_ok=True)
            (directory / "framework.yaml").write_text(serialize_framework(build.config), encoding="utf-8")
            for relative, source in build.stubs.items():
                (directory / relative).write_text(source, encoding="utf-8")
            self.frameworks.append(build.config)
            self.summary.frameworks_built += 1

    def synth(self) -> None:
        options = self.manifest.synth
        if not self.frameworks or options.queries_per_framework == 0:
            return

        tree = load_tree(self.manifest.resolve(options.tree))
        personas = load_personas(self.manifest.resolve(options.personas))
        contexts = [FrameworkContext.from_config(f) for f in self.frameworks]
        conditionings = sample_conditionings(
            tree,
            personas,
            contexts,
            len(contexts) * options.queries_per_framework,
            difficulty_mix=parse_difficulty_mix(options.difficulty_mix),
            seed=self.manifest.seed,
        )
        queries = synthesize_batch(
            conditionings,
            TemplateBackend(self.manifest.seed),
            parallelism=self.manifest.parallelism,
            seed=self.manifest.seed,
            ground=options.ground,
            fuzzify=options.fuzzify,
        )

        for index, query in enumerate(queries):
            if query is None:
                self.summary.queries_failed += 1
                self.fail(f"query {index} could not be synthesized")
            else:
                self.queries.append(query)
        self.summary.queries_synthesized = len(self.queries)

        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "problem_types.yaml").write_text(dump_tree(tree), encoding="utf-8")
        with open(self.out / "queries.jsonl", "w", encoding="utf-8") as f:
            for query in self.queries:
                f.write(json.dumps(query.to_record(), ensure_ascii=False, sort_keys=True) + "\n")

    def run(self) -> None:
        options = self.manifest.run
        by_name = {f.name: f for f in self.frameworks}
        gateway = make_gateway(options.backend, seed=self.manifest.seed, script=self.manifest.resolve(options.script))

        def work(item: Tuple[int, SynthesizedQuery]) -> Tuple[Optional[RunResult], str]:
            index, query = item
            framework = by_name[query.conditioning.framework_context.name]
            try:
                result = execute_run(
                    framework,
                    query.text,
                    gateway,
                    self.out / "runs",
                    seed=derive_seed(self.manifest.seed, index),
                    base_dir=self.framework_dir(framework),
                    storage=self.storage,
                )
            except (AgentScaleError, OSError) as e:
                return None, f"run of query {index} on {framework.name} failed: {e}"
            return result, ""

        for result, error in pool_map(work, list(enumerate(self.queries)), self.manifest.parallelism):
            if result is None:
                self.summary.runs_failed += 1
                self.fail(error)
                continue

            self.results.append(result)
            if result.status == RunStatus.COMPLETED:
                self.summary.runs_completed += 1
            else:
                self.summary.runs_failed += 1
                self.fail(f"run {result.run_id} ended with status {result.status.value}")

        with open(self.out / "trajectories.jsonl", "w", encoding="utf-8") as f:
            for result in sorted(self.results, key=lambda r: r.run_id):
                f.write(result.trajectory.model_dump_json() + "\n")

    def assess(self) -> None:
        options = self.manifest.assess
        taxonomy = load_issue_taxonomy(self.manifest.resolve(options.taxonomy))
        judge = RuleJudge()

        def work(result: RunResult) -> IssueReport:
            return assess_iteratively(
                result.trajectory, taxonomy, judge, options.batch_size, drop_threshold=options.drop_threshold
            )

        reports_dir = self.out / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        for report in pool_map(work, self.results, self.manifest.parallelism):
            self.reports[report.trajectory_id] = report
            (reports_dir / f"{report.trajectory_id}.json").write_text(report.to_json(), encoding="utf-8")
            if report.verdict == Verdict.KEEP:
                self.summary.trajectories_kept += 1
            else:
                self.summary.trajectories_dropped += 1

    def kept(self) -> List[Trajectory]:
        trajectories = [
            result.trajectory
            for result in self.results
            if Stage.ASSESS not in self.manifest.stages or self.reports[result.run_id].verdict == Verdict.KEEP
        ]
        return sorted(trajectories, key=lambda t: t.metadata.run_id)

    def export(self) -> None:
        trajectories = self.kept()
        export_dir = self.out / "export"
        export_dir.mkdir(parents=True, exist_ok=True)
        for dialect in self.manifest.export.dialects:
            lines: List[str] = []
            for trajectory in trajectories:
                try:
                    records = export_records(trajectory, dialect)
                except DialectError as e:
                    self.fail(f"run {trajectory.metadata.run_id} can not be exported as {dialect}: {e}")
                    continue
                lines.extend(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)

            (export_dir / f"{dialect}.jsonl").write_text("".join(lines), encoding="utf-8")
            self.summary.samples_exported[dialect] = len(lines)

    def execute(self) -> PipelineSummary:
        steps: Dict[Stage, Callable[[], None]] = {
            Stage.BUILD: self.build,
            Stage.SYNTH: self.synth,
            Stage.RUN: self.run,
            Stage.ASSESS: self.assess,
            Stage.EXPORT: self.export,
        }
        for stage in self.manifest.stages:
            LOGGER.info(f"Stage {stage.value} started")
            steps[stage]()
            LOGGER.info(f"Stage {stage.value} done: {self.summary.model_dump(exclude={'failures'})}")

        if self.manifest.stages:
            self.out.mkdir(parents=True, exist_ok=True)
            (self.out / "summary.json").write_text(self.summary.model_dump_json(indent=2), encoding="utf-8")
        return self.summary


def run_pipeline(manifest: PipelineManifest) -> PipelineSummary:
    return Pipeline(manifest).execute()
