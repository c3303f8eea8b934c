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
import re
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from agentscale.exceptions import JudgeOutputUnparseable
from agentscale.quality.detectors import run_detectors
from agentscale.quality.report import Assessment, Issue, IssueReport, JudgeState, Verdict, merge_issues
from agentscale.quality.taxonomy import PLACEHOLDER_OUTPUT, TOOL_ERROR, VERBOSE_RETURN, IssueTaxonomy, Severity
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, ScriptedBackend, template
from agentscale.trajectory.events import EventKind, Trajectory, TrajectoryEvent

LOGGER = logging.getLogger(__name__)

TASK = "assess_batch"
DEFAULT_BATCH_SIZE = 20
DEFAULT_DROP_THRESHOLD = Severity.MAJOR
MAX_RETRIES = 2

PLACEHOLDER_RE = re.compile(r"\b(?:todo|tbd|placeholder|lorem ipsum|not implemented)\b", re.IGNORECASE)
VERBOSE_LIMIT = 4000

JUDGE_PROMPT = """\
You audit the trajectory of an agent, a few events at a time.  You get the next batch of events and your
assessment of the previous ones.  Report the problems you see in the batch, using only these categories:
{categories}
Answer with a json object {{"issues": [{{"category", "message_range": [first seq, last seq], "evidence",
"severity"}}], "summary": <your updated assessment>}}.  Report only new issues.
"""


class ReportedIssue(BaseModel):
    model_config = ConfigDict(extra="forbid")

    category: str
    message_range: Tuple[int, int]
    evidence: str = ""
    severity: Optional[Severity] = None


class JudgeOutput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    issues: List[ReportedIssue] = Field(default_factory=list)
    summary: str = ""


def rule_issues(events: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """
    The issues a careful judge reports on a batch, decided event by event so that the outcome doesn't
    depend on how the trajectory is cut in batches.
    """
    issues: List[Dict[str, Any]] = []
    for event in events:
        if event["kind"] != EventKind.TOOL_RESULT.value:
            continue

        seq = event["seq"]
        content = str(event["payload"].get("content", ""))
        name = event["payload"].get("name")
        if event["payload"].get("is_error"):
            issues.append({"category": TOOL_ERROR, "message_range": [seq, seq], "evidence": f"{name} failed: {content[:200]}"})
        elif PLACEHOLDER_RE.search(content):
            issues.append({"category": PLACEHOLDER_OUTPUT, "message_range": [seq, seq], "evidence": content[:200]})
        elif len(content) > VERBOSE_LIMIT:
            issues.append({"category": VERBOSE_RETURN, "message_range": [seq, seq], "evidence": f"{len(content)} characters"})
    return issues


@template(TASK)
def rule_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    events = request.payload["batch"]
    known = len(request.payload["assessment"].get("issues", []))
    issues = rule_issues(events)
    last = events[-1]["seq"] if events else 0
    return json.dumps({"issues": issues, "summary": f"{known + len(issues)} issue(s) up to event {last}"})


class RuleJudge(GeneratorBackend):
    """
    Deterministic judge applying fixed rules: error observations, placeholder and oversized tool outputs.
    It is the offline default, and the reference batched assessment is checked against.
    """

    name = "rule-judge"

    def generate(self, request: GenerationRequest) -> str:
        return rule_template(request, np.random.default_rng(0))


class ScriptedJudge(ScriptedBackend):
    """
    Judge replaying canned answers, to test how assessment handles what a model could say.
    """

    name = "scripted-judge"


def event_view(event: TrajectoryEvent) -> Dict[str, Any]:
    return event.model_dump(mode="json", exclude={"wall_time", "run_id"})


def parse_judge_output(raw: str, taxonomy: IssueTaxonomy, bounds: Tuple[int, int]) -> Tuple[List[Issue], str]:
    """
    Validate what a judge answered: well formed json, known categories, ranges within the trajectory.

    :raises JudgeOutputUnparseable: The answer breaks one of these rules
    """
    try:
        output = JudgeOutput.model_validate(json.loads(raw))
    except (json.JSONDecodeError, ValidationError) as e:
        raise JudgeOutputUnparseable(f"The judge answer is not a valid assessment: {e}")

    issues: List[Issue] = []
    for reported in output.issues:
        if reported.category not in taxonomy:
            raise JudgeOutputUnparseable(f"Unknown issue category {reported.category!r}")
        start, end = reported.message_range
        if not bounds[0] <= start <= end <= bounds[1]:
            raise JudgeOutputUnparseable(f"Message range {reported.message_range} is outside of {list(bounds)}")
        issues.append(
            Issue(
                category=reported.category,
                message_range=(start, end),
                evidence=reported.evidence,
                severity=reported.severity or taxonomy.severity(reported.category),
            )
        )
    return issues, output.summary


def _judge_step(
    judge: GeneratorBackend,
    taxonomy: IssueTaxonomy,
    state: JudgeState,
    batch: List[TrajectoryEvent],
    bounds: Tuple[int, int],
    max_retries: int,
) -> Assessment:
    payload = {"batch": [event_view(e) for e in batch], "assessment": state.running_assessment.model_dump(mode="json")}
    prompt = JUDGE_PROMPT.format(categories="\n".join(f"- {c}" for c in taxonomy.ids))
    feedback: List[str] = []
    for attempt in range(max_retries + 1):
        raw = judge.generate(GenerationRequest(task=TASK, prompt=prompt, payload=payload, attempt=attempt, feedback=feedback))
        try:
            issues, summary = parse_judge_output(raw, taxonomy, bounds)
        except JudgeOutputUnparseable as e:
            LOGGER.warning(f"Judge answer rejected at event {state.cursor} (attempt {attempt + 1}/{max_retries + 1}): {e}")
            feedback = [str(e)]
            continue
        return Assessment(issues=merge_issues(state.running_assessment.issues, issues), summary=summary)

    raise JudgeOutputUnparseable(f"No usable judge answer for the batch starting at event {state.cursor}: {feedback}")


def verdict_for(issues: List[Issue], drop_threshold: Severity) -> Verdict:
    return Verdict.DROP if any(issue.severity.at_least(drop_threshold) for issue in issues) else Verdict.KEEP


def assess_iteratively(
    traj: Trajectory,
    taxonomy: IssueTaxonomy,
    judge: GeneratorBackend,
    batch_size: int = DEFAULT_BATCH_SIZE,
    *,
    drop_threshold: Severity = DEFAULT_DROP_THRESHOLD,
    max_retries: int = MAX_RETRIES,
) -> IssueReport:
    """
    Walk the trajectory in batches of events.  At each step the judge only gets the batch and its running
    assessment, never the events it already saw.  The detector issues are merged with the judge issues,
    the trajectory is dropped if any issue reaches the drop threshold.

    When the judge keeps answering nonsense, the report falls back to the detector issues and is flagged.
    """
    if batch_size < 1:
        raise ValueError(f"The batch size must be at least 1, got {batch_size}")

    detected = run_detectors(traj)
    events = traj.events
    bounds = (events[0].seq, events[-1].seq) if events else (0, 0)
    state = JudgeState(cursor=bounds[0], batch_size=batch_size)

    fallback = False
    for start in range(0, len(events), batch_size):
        batch = events[start : start + batch_size]
        try:
            assessment = _judge_step(judge, taxonomy, state, batch, bounds, max_retries)
        except JudgeOutputUnparseable as e:
            LOGGER.warning(f"Falling back to detector issues for {traj.metadata.run_id}: {e}")
            fallback = True
            break
        state.advance(batch[-1].seq + 1, assessment)

    judged = [] if fallback else state.running_assessment.issues
    issues = merge_issues(detected, judged)
    return IssueReport(
        trajectory_id=traj.metadata.run_id,
        issues=issues,
        verdict=verdict_for(issues, drop_threshold),
        summary=state.running_assessment.summary if not fallback else "judge output unusable, detector issues only",
        judge_steps=state.steps,
        fallback=fallback,
    )


def assess_whole(
    traj: Trajectory,
    taxonomy: IssueTaxonomy,
    judge: GeneratorBackend,
    *,
    drop_threshold: Severity = DEFAULT_DROP_THRESHOLD,
    max_retries: int = MAX_RETRIES,
) -> IssueReport:
    """
    Single pass assessment, the judge sees the whole trajectory at once.
    """
    return assess_iteratively(
        traj, taxonomy, judge, max(1, len(traj.events)), drop_threshold=drop_threshold, max_retries=max_retries
    )
