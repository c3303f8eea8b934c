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
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from agentscale.gateway.models import Message, Role, ToolCall, ToolSchema
from agentscale.helpers.utils import canonical_json, digest


class EventKind(str, enum.Enum):
    SYSTEM_INIT = "system_init"
    USER_TASK = "user_task"
    MODEL_TURN = "model_turn"
    TOOL_CALL = "tool_call"
    TOOL_RESULT = "tool_result"
    DELEGATION_START = "delegation_start"
    DELEGATION_END = "delegation_end"
    RUN_END = "run_end"


class RunStatus(str, enum.Enum):
    COMPLETED = "completed"
    MAX_ITERATIONS_EXHAUSTED = "max_iterations_exhausted"
    ABORTED = "aborted"


class TrajectoryEvent(BaseModel):
    seq: int
    run_id: str
    context_path: Tuple[str, ...]
    kind: EventKind
    payload: Dict[str, Any] = Field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def path(self) -> str:
        return "/".join(self.context_path)


class TrajectoryMetadata(BaseModel):
    run_id: str = ""
    framework: str = ""
    node_count: int = 0
    task: str = ""
    dialect: str = "openai-json"
    status: Optional[RunStatus] = None


class Trajectory(BaseModel):
    """
    The ordered record of one run, all contexts included.  Messages of each context can be rebuilt from
    the events, that is what the dialects render.
    """

    events: List[TrajectoryEvent] = Field(default_factory=list)
    metadata: TrajectoryMetadata = Field(default_factory=TrajectoryMetadata)

    @property
    def status(self) -> Optional[RunStatus]:
        return self.metadata.status

    @property
    def final_answer(self) -> str:
        for event in reversed(self.events):
            if event.kind == EventKind.RUN_END:
                return str(event.payload.get("final_answer", ""))
        return ""

    def context_paths(self) -> List[Tuple[str, ...]]:
        paths: List[Tuple[str, ...]] = []
        for event in self.events:
            if event.kind == EventKind.SYSTEM_INIT and event.context_path not in paths:
                paths.append(event.context_path)
        return paths

    def contexts(self) -> Dict[Tuple[str, ...], List[Message]]:
        """
        Rebuild the message list of every context, in order of creation.
        """
        result: Dict[Tuple[str, ...], List[Message]] = {}
        for event in self.events:
            messages = result.setdefault(event.context_path, []) if event.kind != EventKind.RUN_END else None
            if event.kind == EventKind.SYSTEM_INIT:
                assert messages is not None
                messages.append(Message(role=Role.SYSTEM, content=event.payload.get("content", "")))
            elif event.kind == EventKind.USER_TASK:
                assert messages is not None
                messages.append(Message(role=Role.USER, content=event.payload.get("content", "")))
            elif event.kind == EventKind.MODEL_TURN:
                assert messages is not None
                messages.append(
                    Message(
                        role=Role.ASSISTANT,
                        content=event.payload.get("content", ""),
                        tool_calls=[ToolCall(**call) for call in event.payload.get("tool_calls", [])],
                    )
                )
            elif event.kind == EventKind.TOOL_RESULT:
                assert messages is not None
                messages.append(
                    Message(
                        role=Role.TOOL,
                        content=event.payload.get("content", ""),
                        tool_call_id=event.payload["id"],
                        name=event.payload.get("name"),
                    )
                )

        return {path: messages for path, messages in result.items() if messages}

    def tools(self, context_path: Tuple[str, ...]) -> List[ToolSchema]:
        """
        The tools that were visible to the model in the given context.
        """
        for event in self.events:
            if event.kind == EventKind.SYSTEM_INIT and event.context_path == context_path:
                return [ToolSchema(**tool) for tool in event.payload.get("tools", [])]
        return []

    def nesting_problems(self) -> List[str]:
        """
        Check that delegation_start and delegation_end events form balanced brackets along seq order, and
        that seq strictly increases.
        """
        problems: List[str] = []
        stack: List[Tuple[Tuple[str, ...], Tuple[str, ...]]] = []
        previous = 0
        for event in self.events:
            if event.seq <= previous:
                problems.append(f"seq {event.seq} is not greater than {previous}")
            previous = event.seq

            if event.kind == EventKind.DELEGATION_START:
                stack.append((event.context_path, tuple(event.payload.get("child_path", ()))))
            elif event.kind == EventKind.DELEGATION_END:
                closing = (event.context_path, tuple(event.payload.get("child_path", ())))
                if not stack or stack[-1] != closing:
                    problems.append(f"delegation_end at seq {event.seq} doesn't close the last open delegation")
                else:
                    stack.pop()

        if stack:
            problems.append(f"{len(stack)} delegation(s) never closed")

        run_ends = sum(1 for e in self.events if e.kind == EventKind.RUN_END)
        if run_ends != 1:
            problems.append(f"Expected exactly one run_end event, got {run_ends}")

        return problems

    def dangling_calls(self) -> List[TrajectoryEvent]:
        """
        All the tool_call events that never got a tool_result.
        """
        answered = {(e.context_path, e.payload.get("id")) for e in self.events if e.kind == EventKind.TOOL_RESULT}
        return [
            e for e in self.events if e.kind == EventKind.TOOL_CALL and (e.context_path, e.payload.get("id")) not in answered
        ]

    def digest(self) -> str:
        """
        Hash of the trajectory content, wall clock excluded.
        """
        return digest(
            [e.model_dump(mode="json", exclude={"wall_time"}) for e in self.events],
            self.metadata.model_dump(mode="json"),
        )

    def semantic_view(self) -> List[Tuple[str, List[Tuple[Any, ...]]]]:
        """
        What a dialect has to preserve: for every context, the roles, the stripped contents and the tool calls
        (names and arguments, in order).  Call ids and whitespace don't matter.
        """
        view: List[Tuple[str, List[Tuple[Any, ...]]]] = []
        for path, messages in self.contexts().items():
            entries: List[Tuple[Any, ...]] = []
            for message in messages:
                calls = tuple((call.name, canonical_json(call.arguments)) for call in message.tool_calls)
                entries.append((message.role.value, message.content.strip(), calls))
            view.append(("/".join(path), entries))
        return view

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.model_dump(mode="json"), ensure_ascii=False) + "\n" for e in self.events)


def read_events(path: Path) -> List[TrajectoryEvent]:
    """
    Read the events of an append-only event log.
    """
    events: List[TrajectoryEvent] = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                events.append(TrajectoryEvent.model_validate_json(line))
    return events
