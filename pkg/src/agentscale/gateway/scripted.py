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
import threading
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from agentscale.exceptions import SchemaError, ScriptExhausted
from agentscale.gateway.base import ModelGateway
from agentscale.gateway.models import FinishReason, ModelRequest, ModelTurn, ToolCall
from agentscale.helpers.utils import load_document

LOGGER = logging.getLogger(__name__)

SCRIPT_VERSION = 1
HEADER_KEY = "nexau_script"


class ScriptedCall(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    arguments: Dict[str, Any] = Field(default_factory=dict)


class ScriptedTurn(BaseModel):
    """
    One turn of a script.  A turn with a path answers the step-th request of that context, a turn
    without path answers the step-th unkeyed request of the run.
    """

    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = None
    step: int = 0
    content: str = ""
    tool_calls: List[ScriptedCall] = Field(default_factory=list)
    finish_reason: Optional[FinishReason] = None

    @property
    def key(self) -> Tuple[Optional[str], int]:
        return self.path, self.step

    def to_turn(self) -> ModelTurn:
        calls = [ToolCall(name=c.name, arguments=dict(c.arguments)) for c in self.tool_calls]
        if calls:
            return ModelTurn(content=self.content, tool_calls=calls, finish_reason=FinishReason.TOOL_CALLS)
        finish_reason = self.finish_reason if self.finish_reason not in (None, FinishReason.TOOL_CALLS) else FinishReason.STOP
        return ModelTurn(content=self.content, finish_reason=finish_reason)

    @classmethod
    def from_turn(cls, turn: ModelTurn, path: Optional[str], step: int) -> "ScriptedTurn":
        return cls(
            path=path,
            step=step,
            content=turn.content,
            tool_calls=[ScriptedCall(name=c.name, arguments=c.arguments) for c in turn.tool_calls],
            finish_reason=turn.finish_reason,
        )


class Script(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strict: bool = True
    default_turn: Optional[ScriptedTurn] = None
    turns: List[ScriptedTurn] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_unique_keys(self) -> "Script":
        seen = set()
        for turn in self.turns:
            if turn.key in seen:
                raise ValueError(f"Two turns of the script share the key {turn.key}")
            seen.add(turn.key)
        return self


def parse_script(document: str) -> Script:
    data = load_document(document, HEADER_KEY, SCRIPT_VERSION, "script")

    try:
        return Script.model_validate(data)
    except ValueError as e:
        raise SchemaError(str(e))


def load_script(path: Path) -> Script:
    return parse_script(path.read_text(encoding="utf-8"))


def dump_script(script: Script) -> str:
    data: Dict[str, Any] = {HEADER_KEY: SCRIPT_VERSION}
    data.update(script.model_dump(mode="json", exclude_none=True))
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)


class ScriptedGateway(ModelGateway):
    """
    Deterministic backend replaying a script.  Turns keyed by context path are looked up with the number of
    assistant messages already present in the request, so that every context consumes its own stream.
    Unkeyed turns are consumed in step order, with one cursor per run.
    """

    name = "scripted"

    def __init__(self, script: Script) -> None:
        self.script = script
        self._keyed: Dict[Tuple[str, int], ScriptedTurn] = {
            (turn.path, turn.step): turn for turn in script.turns if turn.path is not None
        }
        self._unkeyed: Dict[int, ScriptedTurn] = {turn.step: turn for turn in script.turns if turn.path is None}
        self._cursors: Dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()

    @classmethod
    def from_turns(cls, *turns: ModelTurn, strict: bool = True) -> "ScriptedGateway":
        """
        Build a gateway answering the given turns in order, whatever the requesting context.
        """
        return cls(Script(strict=strict, turns=[ScriptedTurn.from_turn(t, None, i) for i, t in enumerate(turns)]))

    @classmethod
    def from_paths(cls, streams: Dict[str, List[ModelTurn]], strict: bool = True) -> "ScriptedGateway":
        """
        Build a gateway with one stream of turns per context path.
        """
        turns = [
            ScriptedTurn.from_turn(turn, path, step) for path, stream in streams.items() for step, turn in enumerate(stream)
        ]
        return cls(Script(strict=strict, turns=turns))

    def generate(self, request: ModelRequest) -> ModelTurn:
        keyed = self._keyed.get((request.path, request.step))
        if keyed is not None:
            LOGGER.debug(f"Scripted turn {request.path}#{request.step}")
            return keyed.to_turn()

        run = request.run_id.split("/")[0]
        with self._lock:
            cursor = self._cursors[run]
            unkeyed = self._unkeyed.get(cursor)
            if unkeyed is not None:
                self._cursors[run] += 1

        if unkeyed is not None:
            LOGGER.debug(f"Scripted turn {cursor} of run {run} for {request.path}")
            return unkeyed.to_turn()

        if self.script.strict:
            raise ScriptExhausted(f"The script has no turn left for context {request.path} (step {request.step})")

        if self.script.default_turn is not None:
            return self.script.default_turn.to_turn()

        return ModelTurn.answer("")


class CapturingGateway(ModelGateway):
    """
    Wrap a backend and record every turn it produces, keyed by context path and step, so that a run can
    be replayed later by a ScriptedGateway.
    """

    name = "capturing"

    def __init__(self, inner: ModelGateway) -> None:
        self.inner = inner
        self._captured: Dict[Tuple[str, int], ModelTurn] = {}
        self._lock = threading.Lock()

    def generate(self, request: ModelRequest) -> ModelTurn:
        turn = self.inner.generate(request)
        with self._lock:
            self._captured[(request.path, request.step)] = turn
        return turn

    def to_script(self) -> Script:
        with self._lock:
            captured = sorted(self._captured.items())
        return Script(strict=True, turns=[ScriptedTurn.from_turn(turn, path, step) for (path, step), turn in captured])

    def close(self) -> None:
        self.inner.close()
