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
import threading
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, StrictBool

from agentscale.capabilities.tools import ExecutorKind, Observation, ToolDescriptor
from agentscale.helpers.utils import canonical_json
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, template

LOGGER = logging.getLogger(__name__)

REPAIR_PROMPT = "Fix the item so that every failing check passes, change nothing else.  Answer with the fixed item only."


class CheckResult(BaseModel):
    question: str
    answer: StrictBool
    check: str = ""


class SupervisorVerdict(BaseModel):
    """
    Binary judgments over an item, it passes when every answer is yes.
    """

    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.answer for check in self.checks)

    @property
    def failing(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.answer]

    def to_dict(self) -> Dict[str, object]:
        return {"checks": [c.model_dump() for c in self.checks], "pass": self.passed}


class Supervisor:
    """
    Parent class for everything judging a generated artifact.  A supervisor only answers yes or no
    questions, never scores.
    """

    def judge(self, item: str) -> SupervisorVerdict:
        raise NotImplementedError(f"Supervisor {type(self).__name__} has no judge implementation")


def _valid_json(item: str, _: str) -> bool:
    try:
        json.loads(item)
    except ValueError:
        return False
    return True


def _python_compiles(item: str, _: str) -> bool:
    try:
        compile(item, "<item>", "exec")
    except (SyntaxError, ValueError):
        return False
    return True


Predicate = Callable[[str, str], bool]

PREDICATES: Dict[str, Tuple[str, Predicate]] = {
    "non_empty": ("Is the item non empty?", lambda item, _: bool(item.strip())),
    "contains": ("Does the item contain {arg!r}?", lambda item, arg: arg in item),
    "valid_json": ("Is the item valid json?", _valid_json),
    "python_compiles": ("Does the item compile as python?", _python_compiles),
}


class ChecklistSupervisor(Supervisor):
    """
    Supervisor evaluating a fixed checklist.  Checks are named by predicate, with an optional argument
    after a colon, like "contains:def main".
    """

    def __init__(self, checks: List[str]) -> None:
        for check in checks:
            predicate = check.partition(":")[0]
            if predicate not in PREDICATES:
                raise ValueError(f"Unknown check {predicate!r}, expected one of {sorted(PREDICATES)}")
        self.checks = checks

    def judge(self, item: str) -> SupervisorVerdict:
        results = []
        for check in self.checks:
            predicate, _, argument = check.partition(":")
            question, fn = PREDICATES[predicate]
            results.append(CheckResult(question=question.format(arg=argument), answer=fn(item, argument), check=check))
        return SupervisorVerdict(checks=results)


class ScriptedSupervisor(Supervisor):
    """
    Replay a fixed sequence of pass/fail verdicts, the last one is repeated.
    """

    def __init__(self, answers: List[bool]) -> None:
        if not answers:
            raise ValueError("A scripted supervisor needs at least one answer")
        self.answers = answers
        self.items: List[str] = []
        self._lock = threading.Lock()

    def judge(self, item: str) -> SupervisorVerdict:
        with self._lock:
            answer = self.answers[min(len(self.items), len(self.answers) - 1)]
            self.items.append(item)
        return SupervisorVerdict(checks=[CheckResult(question="Is the item acceptable?", answer=answer, check="scripted")])


@template("repair")
def repair_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    item: str = request.payload["item"]
    for check in request.payload["failing"]:
        predicate, _, argument = check.partition(":")
        if predicate == "non_empty":
            item = item or "(empty)"
        elif predicate == "contains":
            item = f"{item}\n{argument}" if item else argument
        elif predicate == "python_compiles":
            item = "\n".join(f"# {line}" for line in item.splitlines())
        elif predicate == "valid_json":
            item = json.dumps({"text": item}, ensure_ascii=False)
    return item


class RepairOutcome(BaseModel):
    accepted: bool
    item: str
    repairs: int
    reason: str = ""
    checks: List[CheckResult] = Field(default_factory=list)


def run_repair_loop(
    item: str,
    supervisor: Supervisor,
    repairer: GeneratorBackend,
    max_repair_iterations: int,
    *,
    seed: int = 0,
) -> RepairOutcome:
    """
    Supervise the item, repair it while it fails.  After max_repair_iterations failed repairs the item is
    discarded, the checks it last failed are kept in the outcome.
    """
    if max_repair_iterations < 0:
        raise ValueError(f"max_repair_iterations can not be negative, got {max_repair_iterations}")

    repairs = 0
    while True:
        verdict = supervisor.judge(item)
        if verdict.passed:
            LOGGER.debug(f"Item accepted after {repairs} repair(s)")
            return RepairOutcome(accepted=True, item=item, repairs=repairs, checks=verdict.checks)

        if repairs >= max_repair_iterations:
            reason = f"still failing after {repairs} repair(s): {[c.question for c in verdict.failing]}"
            LOGGER.info(f"Discarding item, {reason}")
            return RepairOutcome(accepted=False, item=item, repairs=repairs, reason=reason, checks=verdict.failing)

        failing = [c.check or c.question for c in verdict.failing]
        request = GenerationRequest(
            task="repair",
            prompt=REPAIR_PROMPT,
            payload={"item": item, "failing": failing},
            seed=seed,
            attempt=repairs,
        )
        item = repairer.generate(request)
        repairs += 1


def supervisor_descriptor(
    supervisor: Supervisor, name: str = "supervisor", description: Optional[str] = None
) -> ToolDescriptor:
    """
    Expose a supervisor as a tool, agents can then ask for a verdict on their own output.
    """

    def execute(arguments: Dict[str, object], ctx: object) -> Observation:
        verdict = supervisor.judge(str(arguments["item"]))
        data = verdict.to_dict()
        return Observation(content=canonical_json(data), data=data)

    return ToolDescriptor(
        name=name,
        description=description or "Check an item against the supervisor checklist, every check answers yes or no.",
        input_schema={"type": "object", "properties": {"item": {"type": "string"}}, "required": ["item"]},
        kind=ExecutorKind.BUILTIN,
        executor=execute,
    )
