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

import difflib
import re
from collections import Counter
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

from agentscale.gateway.models import FinishReason
from agentscale.helpers.utils import canonical_json
from agentscale.quality.report import Issue
from agentscale.quality.taxonomy import PHANTOM_ARTIFACT, REPETITION, TRUNCATION, Severity
from agentscale.trajectory.events import EventKind, RunStatus, Trajectory, TrajectoryEvent

DEFAULT_WINDOW = 8
DEFAULT_THRESHOLD = 3
SIMILARITY = 0.95

PATH_RE = re.compile(r"(?<![\w/.-])((?:[\w-]+/)*[\w-]+\.(?:py|md|txt|json|csv|yaml|yml|log))\b")
CLAIM_RE = re.compile(r"\b(?:ran|passed|read|opened|tested|executed|created|wrote|saved)\b", re.IGNORECASE)

Detector = Callable[[Trajectory], Optional[Issue]]
CallKey = Tuple[Tuple[str, ...], Any]


def detect_truncation(traj: Trajectory) -> Optional[Issue]:
    """
    Flag a trajectory that stopped early: a turn cut by the length limit, a call that never got its result
    (aborted runs excepted) or a run that used up its iterations.
    """
    flagged: List[Tuple[int, str]] = []
    for event in traj.events:
        if event.kind == EventKind.MODEL_TURN and event.payload.get("finish_reason") == FinishReason.LENGTH.value:
            flagged.append((event.seq, f"turn {event.seq} of {event.path} hit the length limit"))

    if traj.status != RunStatus.ABORTED:
        for event in traj.dangling_calls():
            flagged.append((event.seq, f"call {event.payload.get('name')} at {event.seq} never got a result"))

    if traj.status == RunStatus.MAX_ITERATIONS_EXHAUSTED:
        last = traj.events[-1].seq if traj.events else 0
        flagged.append((last, "the run used up its iterations"))

    if not flagged:
        return None

    seqs = [seq for seq, _ in flagged]
    return Issue(
        category=TRUNCATION,
        message_range=(min(seqs), max(seqs)),
        evidence="; ".join(reason for _, reason in flagged),
        severity=Severity.CRITICAL,
        origin="detector",
    )


def _turn_text(event: TrajectoryEvent) -> str:
    calls = [(c.get("name"), canonical_json(c.get("arguments", {}))) for c in event.payload.get("tool_calls", [])]
    return " ".join(str(event.payload.get("content", "")).lower().split()) + (canonical_json(calls) if calls else "")


def similar(a: str, b: str) -> bool:
    if a == b:
        return True
    return difflib.SequenceMatcher(None, a, b, autojunk=False).ratio() >= SIMILARITY


def ngram_loop(text: str, window: int) -> Optional[Tuple[Tuple[str, ...], int]]:
    """
    The n-gram dominating a text, if any: it occurs at least 3 times and its occurrences cover at least
    half of the tokens.
    """
    tokens = text.split()
    if len(tokens) < window * 3:
        return None
    counts = Counter(tuple(tokens[i : i + window]) for i in range(len(tokens) - window + 1))
    gram, count = counts.most_common(1)[0]
    if count >= 3 and count * window >= len(tokens) / 2:
        return gram, count
    return None


def detect_repetition(traj: Trajectory, window: int = DEFAULT_WINDOW, threshold: int = DEFAULT_THRESHOLD) -> Optional[Issue]:
    """
    Flag the first loop of a trajectory: threshold consecutive near-identical assistant turns of one
    context, or a single turn dominated by a repeated n-gram of window tokens.
    """
    turns: Dict[Tuple[str, ...], List[TrajectoryEvent]] = {}
    for event in traj.events:
        if event.kind == EventKind.MODEL_TURN:
            turns.setdefault(event.context_path, []).append(event)

    found: List[Issue] = []
    for events in turns.values():
        run = [events[0]] if events else []
        for previous, current in zip(events, events[1:]):
            if similar(_turn_text(previous), _turn_text(current)):
                run.append(current)
            else:
                run = [current]
            if len(run) == threshold:
                found.append(
                    Issue(
                        category=REPETITION,
                        message_range=(run[0].seq, run[-1].seq),
                        evidence=f"{threshold} consecutive near-identical turns in {current.path}",
                        origin="detector",
                    )
                )

        for event in events:
            loop = ngram_loop(str(event.payload.get("content", "")), window)
            if loop is not None:
                gram, count = loop
                found.append(
                    Issue(
                        category=REPETITION,
                        message_range=(event.seq, event.seq),
                        evidence=f"{' '.join(gram)!r} repeated {count} times",
                        origin="detector",
                    )
                )

    if not found:
        return None
    return min(found, key=lambda issue: issue.message_range)


def _normalize_path(path: str) -> str:
    return re.sub(r"^(?:\./|/)+", "", path.strip())


def detect_phantom_artifacts(traj: Trajectory) -> Optional[Issue]:
    """
    Flag results and claims about files the trajectory never created: a successful read of a path nobody
    wrote, or an assistant turn claiming to have read, run or tested such a file.
    """
    created: Set[str] = set()
    pending_writes: Dict[CallKey, str] = {}
    phantom: List[Tuple[int, str]] = []
    calls: Dict[CallKey, Dict[str, Any]] = {}

    for event in traj.events:
        if event.kind == EventKind.TOOL_CALL:
            calls[(event.context_path, event.payload.get("id"))] = event.payload
            if event.payload.get("name") == "fs_write":
                arguments = event.payload.get("arguments", {})
                pending_writes[(event.context_path, event.payload.get("id"))] = str(arguments.get("path", ""))

        elif event.kind == EventKind.TOOL_RESULT:
            key = (event.context_path, event.payload.get("id"))
            if key in pending_writes and not event.payload.get("is_error"):
                created.add(_normalize_path(str(pending_writes.pop(key))))
            call = calls.get(key, {})
            if call.get("name") == "fs_read" and not event.payload.get("is_error"):
                path = _normalize_path(str(call.get("arguments", {}).get("path", "")))
                if path not in created:
                    phantom.append((event.seq, f"read of {path!r} succeeded but it was never written"))

        elif event.kind == EventKind.MODEL_TURN:
            for sentence in re.split(r"(?<=[.!?])\s+", str(event.payload.get("content", ""))):
                if not CLAIM_RE.search(sentence):
                    continue
                for path in PATH_RE.findall(sentence):
                    if _normalize_path(path) not in created:
                        phantom.append((event.seq, f"claims about {path!r} which was never created"))

    if not phantom:
        return None

    seqs = [seq for seq, _ in phantom]
    return Issue(
        category=PHANTOM_ARTIFACT,
        message_range=(min(seqs), max(seqs)),
        evidence="; ".join(reason for _, reason in phantom),
        severity=Severity.CRITICAL,
        origin="detector",
    )


DETECTORS: List[Detector] = [detect_truncation, detect_repetition, detect_phantom_artifacts]


def run_detectors(traj: Trajectory) -> List[Issue]:
    return [issue for issue in (detector(traj) for detector in DETECTORS) if issue is not None]
