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

import logging
from typing import Dict, List, Optional, Tuple

from agentscale.gateway.models import Message, Role
from agentscale.helpers.utils import canonical_json
from agentscale.trajectory.dialects.base import syntax_error
from agentscale.trajectory.dialects.registry import get_dialect
from agentscale.trajectory.events import EventKind, RunStatus, Trajectory, TrajectoryEvent, TrajectoryMetadata

LOGGER = logging.getLogger(__name__)

CONTEXT_HEADER = "### context: "


def render_context(messages: List[Message], dialect: str) -> str:
    return get_dialect(dialect).render_messages(messages)


def render_samples(trajectory: Trajectory, dialect: str) -> List[Tuple[Tuple[str, ...], str]]:
    """
    Render every context of the trajectory as an independent sample.

    :raises UnrepresentableFeature: If the dialect can not express part of the trajectory
    """
    return [(path, render_context(messages, dialect)) for path, messages in trajectory.contexts().items()]


def normalize(trajectory: Trajectory, dialect: str) -> str:
    """
    Render a trajectory in a dialect: one sample per context, each introduced by a context header line.
    """
    return "".join(f"{CONTEXT_HEADER}{'/'.join(path)}\n{rendered}\n" for path, rendered in render_samples(trajectory, dialect))


def split_samples(text: str) -> List[Tuple[Tuple[str, ...], str, int]]:
    """
    Split a normalized document into (context path, sample text, sample offset) triples.
    """
    samples: List[Tuple[Tuple[str, ...], str, int]] = []
    path: Optional[Tuple[str, ...]] = None
    current: List[str] = []
    start = 0
    position = 0
    for line in text.split("\n"):
        if line.startswith(CONTEXT_HEADER):
            if path is not None:
                samples.append((path, "\n".join(current), start))
            path = tuple(line[len(CONTEXT_HEADER) :].strip().split("/"))
            current = []
            start = position + len(line) + 1
        elif path is None:
            if line.strip():
                raise syntax_error(text, position, f"Expected a {CONTEXT_HEADER.strip()!r} header line")
        else:
            current.append(line)
        position += len(line) + 1

    if path is not None:
        samples.append((path, "\n".join(current), start))

    return samples


def parse_back(text: str, dialect: str) -> Trajectory:
    """
    Parse a normalized document back into a trajectory.  Only what the dialects carry is restored: the
    messages and calls of every context, not the delegation structure nor the timing.

    :raises DialectSyntaxError: If the text doesn't follow the grammar of the dialect
    """
    parser = get_dialect(dialect)
    events: List[TrajectoryEvent] = []

    def add(kind: EventKind, path: Tuple[str, ...], payload: Dict) -> None:
        events.append(TrajectoryEvent(seq=len(events) + 1, run_id="", context_path=path, kind=kind, payload=payload))

    root_answer = ""
    for index, (path, body, offset) in enumerate(split_samples(text)):
        messages = parser.parse_messages(body, offset, text)
        for message in messages:
            if message.role == Role.SYSTEM:
                add(EventKind.SYSTEM_INIT, path, {"content": message.content, "agent": path[-1]})
            elif message.role == Role.USER:
                add(EventKind.USER_TASK, path, {"content": message.content})
            elif message.role == Role.ASSISTANT:
                calls = [call.model_dump(mode="json") for call in message.tool_calls]
                add(EventKind.MODEL_TURN, path, {"content": message.content, "tool_calls": calls})
                for call in calls:
                    add(EventKind.TOOL_CALL, path, call)
                if index == 0:
                    root_answer = message.content
            else:
                add(
                    EventKind.TOOL_RESULT,
                    path,
                    {"id": message.tool_call_id, "name": message.name, "content": message.content, "is_error": False},
                )

    root_path = events[0].context_path if events else ()
    add(EventKind.RUN_END, root_path, {"status": RunStatus.COMPLETED.value, "final_answer": root_answer})
    return Trajectory(events=events, metadata=TrajectoryMetadata(dialect=dialect, status=RunStatus.COMPLETED))


def transcode(text: str, source: str, target: str) -> str:
    """
    Convert a normalized document from one dialect to another.
    """
    trajectory = parse_back(text, source)
    LOGGER.debug(f"Transcoding {len(trajectory.context_paths())} sample(s) from {source} to {target}")
    return normalize(trajectory, target)


def semantically_equal(a: Trajectory, b: Trajectory) -> bool:
    return canonical_json(a.semantic_view()) == canonical_json(b.semantic_view())
