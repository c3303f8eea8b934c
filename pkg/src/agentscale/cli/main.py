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
import sys
from pathlib import Path
from typing import Any, List, Optional

import click  # type: ignore

from agentscale.cli.pipeline import load_manifest, run_pipeline
from agentscale.cli.runs import (
    BACKENDS,
    EXIT_GATEWAY,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_VALIDATION,
    execute_run,
    exit_code,
    make_gateway,
)
from agentscale.config.parser import load_framework, serialize_framework
from agentscale.exceptions import AgentScaleError, ConfigError, GatewayError
from agentscale.gateway.http import HttpGateway
from agentscale.helpers.utils import setup_logging
from agentscale.quality.judges import DEFAULT_BATCH_SIZE, RuleJudge, assess_iteratively
from agentscale.quality.report import Verdict
from agentscale.quality.taxonomy import load_issue_taxonomy
from agentscale.queries.models import FrameworkContext
from agentscale.queries.personas import load_personas
from agentscale.queries.pipeline import parse_difficulty_mix, sample_conditionings, synthesize_batch
from agentscale.queries.taxonomy import dump_tree, load_tree
from agentscale.synthesis.backend import GatewayBackend, GeneratorBackend, TemplateBackend
from agentscale.synthesis.builder import FrameworkBuilder
from agentscale.synthesis.corpus import seed_descriptions
from agentscale.synthesis.models import Constraints, FrameworkDescription
from agentscale.trajectory.dialects.registry import DIALECT_IDS
from agentscale.trajectory.events import Trajectory
from agentscale.trajectory.normalize import transcode

LOGGER = logging.getLogger(__name__)


def emit(data: Any) -> None:
    click.echo(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False))


def report_config_error(error: ConfigError) -> None:
    findings = getattr(error, "findings", None) or []
    if findings:
        for finding in findings:
            click.echo(f"{finding.path or '<document>'}: [{finding.rule}] {finding.message}", err=True)
    else:
        click.echo(f"{type(error).__name__}: {error}", err=True)


def generator(name: str, seed: int) -> GeneratorBackend:
    if name == "template":
        return TemplateBackend(seed)
    return GatewayBackend(HttpGateway.from_env())


@click.group()
@click.option(
    "--trace",
    is_flag=True,
    help="Enable trace level logging",
)
def main(trace: bool) -> None:
    setup_logging(trace, stream=sys.stderr)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--lenient", is_flag=True, help="Drop unknown keys with a warning instead of rejecting them")
def validate(config: Path, lenient: bool) -> None:
    """Check a framework document."""
    try:
        framework = load_framework(config, lenient=lenient)
    except ConfigError as e:
        report_config_error(e)
        sys.exit(EXIT_VALIDATION)

    emit({"name": framework.name, "node_count": framework.node_count, "depth": framework.depth, "valid": True})


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("task")
@click.option(
    "--backend",
    type=click.Choice(BACKENDS),
    default="policy",
    show_default=True,
    help="Model backend driving the agents",
)
@click.option("--script", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Script of the scripted backend")
@click.option("--seed", default=0, show_default=True, help="Seed of the run")
@click.option(
    "--runs-dir",
    default="runs",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory holding the run directories",
)
@click.option("--dialect-hint", type=click.Choice(DIALECT_IDS), help="Dialect used to parse plain text model answers")
def run(
    config: Path,
    task: str,
    backend: str,
    script: Optional[Path],
    seed: int,
    runs_dir: Path,
    dialect_hint: Optional[str],
) -> None:
    """Execute a framework on one task."""
    try:
        framework = load_framework(config)
    except ConfigError as e:
        report_config_error(e)
        sys.exit(EXIT_VALIDATION)

    try:
        gateway = make_gateway(backend, seed=seed, script=script)
    except (ValueError, ConfigError) as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_VALIDATION)

    try:
        result = execute_run(
            framework,
            task,
            gateway,
            runs_dir,
            seed=seed,
            base_dir=config.parent,
            dialect_hint=dialect_hint,
            resume=False,
        )
    except GatewayError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_GATEWAY)
    except AgentScaleError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_RUNTIME)

    emit({**result.summary(), "run_dir": str(runs_dir / result.run_id)})
    sys.exit(exit_code(result))


@main.command("build-framework")
@click.option("--description", "descriptions", multiple=True, help="Framework-construction query, can be repeated")
@click.option("--corpus", default=0, show_default=True, help="Number of descriptions to take from the seeded corpus")
@click.option("--max-nodes", default=34, show_default=True, help="Upper bound on the number of agents")
@click.option("--seed", default=0, show_default=True, help="Seed of the generator")
@click.option(
    "--generator",
    "generator_name",
    type=click.Choice(["template", "live"]),
    default="template",
    show_default=True,
    help="Backend generating the plans",
)
@click.option(
    "--smoke/--no-smoke",
    default=True,
    show_default=True,
    help="Run every generated custom tool once before accepting it",
)
@click.option(
    "--out",
    default="frameworks",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory to write the frameworks to",
)
def build_framework(
    descriptions: List[str], corpus: int, max_nodes: int, seed: int, generator_name: str, smoke: bool, out: Path
) -> None:
    """Synthesize framework configs from natural language descriptions."""
    requests = [FrameworkDescription(text=d, constraints=Constraints(max_nodes=max_nodes)) for d in descriptions]
    requests.extend(seed_descriptions(corpus, seed))
    if not requests:
        click.echo("Nothing to build, give at least one --description or a --corpus size", err=True)
        sys.exit(EXIT_VALIDATION)

    builder = FrameworkBuilder(generator(generator_name, seed), seed=seed, smoke=smoke)
    built, failed = [], []
    for desc in requests:
        try:
            build = builder.build(desc)
        except GatewayError as e:
            click.echo(str(e), err=True)
            sys.exit(EXIT_GATEWAY)
        except AgentScaleError as e:
            LOGGER.error(f"Could not build {desc.text!r}: {e}")
            failed.append({"description": desc.text, "error": str(e)})
            continue

        directory = out / build.config.name
        (directory / "tools").mkdir(parents=True, exist_ok=True)
        (directory / "framework.yaml").write_text(serialize_framework(build.config), encoding="utf-8")
        for relative, source in build.stubs.items():
            (directory / relative).write_text(source, encoding="utf-8")
        built.append({**build.provenance, "name": build.config.name, "path": str(directory / "framework.yaml")})

    emit({"built": built, "failed": failed})
    sys.exit(EXIT_RUNTIME if failed else EXIT_OK)


@main.command("synth-queries")
@click.option(
    "--tree",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Problem type tree, the bundled one by default",
)
@click.option(
    "--framework",
    "frameworks",
    multiple=True,
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Framework the queries are for, can be repeated",
)
@click.option("--n", "count", default=10, show_default=True, help="Number of queries")
@click.option("--difficulty-mix", default="1:1:1", show_default=True, help="Weights of easy:medium:hard")
@click.option("--seed", default=0, show_default=True, help="Seed of the sampling and of the generator")
@click.option("--ground", is_flag=True, help="Add retrieved background to the queries")
@click.option("--fuzzify", is_flag=True, help="Make the queries sound more natural")
@click.option("--parallelism", default=1, show_default=True, help="Number of workers")
@click.option(
    "--out",
    default="queries.jsonl",
    show_default=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="File to write the queries to",
)
@click.option(
    "--tree-out",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Where to save the tree with its updated counts",
)
def synth_queries(
    tree: Optional[Path],
    frameworks: List[Path],
    count: int,
    difficulty_mix: str,
    seed: int,
    ground: bool,
    fuzzify: bool,
    parallelism: int,
    out: Path,
    tree_out: Optional[Path],
) -> None:
    """Synthesize user queries for frameworks."""
    try:
        mix = parse_difficulty_mix(difficulty_mix)
        problem_types = load_tree(tree)
        contexts = [FrameworkContext.from_config(load_framework(path)) for path in frameworks]
    except ConfigError as e:
        report_config_error(e)
        sys.exit(EXIT_VALIDATION)
    except ValueError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_VALIDATION)

    conditionings = sample_conditionings(problem_types, load_personas(), contexts, count, difficulty_mix=mix, seed=seed)
    queries = synthesize_batch(
        conditionings, TemplateBackend(seed), parallelism=parallelism, seed=seed, ground=ground, fuzzify=fuzzify
    )

    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        for query in queries:
            if query is not None:
                f.write(json.dumps(query.to_record(), ensure_ascii=False, sort_keys=True) + "\n")
    if tree_out is not None:
        tree_out.write_text(dump_tree(problem_types), encoding="utf-8")

    failed = sum(1 for q in queries if q is None)
    emit({"queries_synthesized": len(queries) - failed, "queries_failed": failed, "out": str(out)})
    sys.exit(EXIT_RUNTIME if failed else EXIT_OK)


@main.command("gen-trajectories")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def gen_trajectories(manifest: Path) -> None:
    """Run a batch generation pipeline."""
    try:
        pipeline = load_manifest(manifest)
    except ConfigError as e:
        report_config_error(e)
        sys.exit(EXIT_VALIDATION)

    try:
        summary = run_pipeline(pipeline)
    except GatewayError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_GATEWAY)

    emit(summary.model_dump(mode="json"))


@main.command()
@click.option("--from", "source", type=click.Choice(DIALECT_IDS), required=True, help="Dialect of the input")
@click.option("--to", "target", type=click.Choice(DIALECT_IDS), required=True, help="Dialect of the output")
@click.argument("input_file", type=click.File("r", encoding="utf-8"), default="-")
@click.argument("output_file", type=click.File("w", encoding="utf-8"), default="-")
def convert(source: str, target: str, input_file: Any, output_file: Any) -> None:
    """Transcode a normalized trajectory document between dialects."""
    try:
        output_file.write(transcode(input_file.read(), source, target))
    except AgentScaleError as e:
        click.echo(f"{type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.option(
    "--in",
    "input_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Trajectories, one json document per line",
)
@click.option(
    "--taxonomy",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Issue taxonomy, the bundled one by default",
)
@click.option(
    "--judge",
    type=click.Choice(["scripted", "live"]),
    default="scripted",
    show_default=True,
    help="The deterministic rule judge, or a model behind the live gateway",
)
@click.option("--batch", "batch_size", default=DEFAULT_BATCH_SIZE, show_default=True, help="Events per judge step")
@click.option(
    "--report",
    default="reports",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory to write the issue reports to",
)
def assess(input_file: Path, taxonomy: Optional[Path], judge: str, batch_size: int, report: Path) -> None:
    """Audit trajectories and decide which ones to keep."""
    try:
        issues = load_issue_taxonomy(taxonomy)
    except ConfigError as e:
        report_config_error(e)
        sys.exit(EXIT_VALIDATION)

    backend: GeneratorBackend = RuleJudge() if judge == "scripted" else GatewayBackend(HttpGateway.from_env())
    report.mkdir(parents=True, exist_ok=True)
    kept = dropped = 0
    with open(input_file, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                trajectory = Trajectory.model_validate_json(line)
            except ValueError as e:
                click.echo(f"Line {number} is not a trajectory: {e}", err=True)
                sys.exit(EXIT_VALIDATION)

            try:
                result = assess_iteratively(trajectory, issues, backend, batch_size)
            except GatewayError as e:
                click.echo(str(e), err=True)
                sys.exit(EXIT_GATEWAY)

            (report / f"{result.trajectory_id or number}.json").write_text(result.to_json(), encoding="utf-8")
            if result.verdict == Verdict.KEEP:
                kept += 1
            else:
                dropped += 1

    emit({"trajectories_kept": kept, "trajectories_dropped": dropped, "report": str(report)})


if __name__ == "__main__":
    main()
