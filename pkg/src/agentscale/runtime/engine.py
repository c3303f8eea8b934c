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
import itertools
import logging
import threading
import time
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional, Tuple

from pydantic import BaseModel

from agentscale.capabilities.environment import CapabilityEnvironment, McpFactory
from agentscale.capabilities.registry import build_registry
from agentscale.capabilities.skills import inject_skills, load_skill
from agentscale.capabilities.storage import GlobalStorage
from agentscale.capabilities.tools import Observation
from agentscale.config.parser import config_digest
from agentscale.config.schema import FINAL_ANSWER_TOOL, AgentSpec, FrameworkConfig, TerminationMode
from agentscale.exceptions import ConfigError, GatewayError, McpError, SkillLoadError
from agentscale.gateway.base import ModelGateway
from agentscale.gateway.models import Message, ModelRequest, Role, SamplingParams
from agentscale.helpers.utils import canonical_json, digest
from agentscale.runtime.context import ExecutionContext
from agentscale.trajectory.events import EventKind, RunStatus, Trajectory, TrajectoryMetadata
from agentscale.trajectory.recorder import TrajectoryRecorder

LOGGER = logging.getLogger(__name__)

CHILD_INPUT_TEMPLATE = "TASK:\n{input}"

# Failures preventing a context from being created, they abort the context but not the run
CONTEXT_ERRORS = (ConfigError, SkillLoadError, McpError)


class StepKind(str, enum.Enum):
    CONTINUE = "continue"
    TERMINATE = "terminate"


class StepOutcome(NamedTuple):
    kind: StepKind
    final_answer: Optional[str] = None

    @property
    def terminated(self) -> bool:
        return self.kind == StepKind.TERMINATE


class DelegationResult(NamedTuple):
    child_run_id: str
    context_path: Tuple[str, ...]
    status: RunStatus
    final_answer: str
    iterations: int = 0
    error: Optional[str] = None


class RunResult(BaseModel):
    run_id: str
    status: RunStatus
    final_answer: str
    trajectory: Trajectory
    iterations: int = 0
    error: Optional[str] = None
    error_kind: Optional[str] = None

    def summary(self) -> Dict[str, Any]:
        """
        Everything but the trajectory, which lives in its own event log.
        """
        return self.model_dump(mode="json", exclude={"trajectory"})


def render_child_input(arguments: Dict[str, Any]) -> str:
    return CHILD_INPUT_TEMPLATE.format(input=canonical_json(arguments))


def derive_run_id(framework: FrameworkConfig, task: str, seed: int) -> str:
    return digest(config_digest(framework), task, seed, length=16)


class AgentRuntime:
    """
    Execute one run of a framework: the root agent loop and, recursively, the loops of every sub-agent it
    delegates to.  Each loop runs in its own context, the parent only ever sees the final answer of a child.

    A runtime instance drives a single run.
    """

    def __init__(
        self,
        framework: FrameworkConfig,
        gateway: ModelGateway,
        recorder: Optional[TrajectoryRecorder] = None,
        *,
        storage: Optional[GlobalStorage] = None,
        mcp_factory: Optional[McpFactory] = None,
        sampling: Optional[SamplingParams] = None,
        dialect_hint: Optional[str] = None,
        script_timeout: Optional[float] = None,
        base_dir: Optional[Path] = None,
    ) -> None:
        self.framework = framework
        self.gateway = gateway
        self.recorder = recorder or TrajectoryRecorder()
        self.sampling = sampling
        self.dialect_hint = dialect_hint
        self.env = CapabilityEnvironment(
            storage=storage,
            base_dir=base_dir,
            script_timeout=script_timeout,
            mcp_factory=mcp_factory,
            delegate=self._delegation_tool,
        )

        self._call_ids = itertools.count(1)
        self._started = False
        self._lock = threading.Lock()

    def new_context(
        self,
        agent: AgentSpec,
        task: str,
        *,
        run_id: str,
        context_path: Tuple[str, ...],
        parent: Optional[ExecutionContext] = None,
    ) -> ExecutionContext:
        """
        Create a context holding the system prompt of the agent, with its skills, and the task as first user
        message.  Nothing is recorded if the creation fails.
        """
        registry = build_registry(agent, self.framework, self.env)
        ctx = ExecutionContext(
            agent,
            registry,
            self.env,
            run_id=run_id,
            context_path=context_path,
            parent=parent,
            runtime=self,
        )
        ctx.append(Message(role=Role.SYSTEM, content=agent.system_prompt))
        inject_skills(ctx, [load_skill(self.env.resolve_path(skill)) for skill in agent.skills])

        self.recorder.record(
            EventKind.SYSTEM_INIT,
            context_path,
            {
                "content": ctx.messages[0].content,
                "agent": agent.name,
                "tools": [schema.model_dump(mode="json") for schema in registry.schemas()],
                "run_id": run_id,
            },
        )
        ctx.append(Message(role=Role.USER, content=task))
        self.recorder.record(EventKind.USER_TASK, context_path, {"content": task})
        return ctx

    def step(self, ctx: ExecutionContext) -> StepOutcome:
        """
        One iteration of the loop: query the model, then dispatch the calls of its turn in order.

        :raises GatewayError: If the model backend failed, the run can not go on
        """
        if ctx.iteration >= ctx.agent.max_iterations:
            raise RuntimeError(f"{ctx} has no iteration left")

        request = ModelRequest(
            messages=list(ctx.messages),
            available_tools=ctx.registry.schemas(),
            dialect_hint=self.dialect_hint,
            sampling=self.sampling or SamplingParams(),
            run_id=ctx.run_id,
            context_path=ctx.context_path,
        )
        turn = self.gateway.generate(request)

        calls = [call.model_copy(update={"id": f"call_{next(self._call_ids)}"}) for call in turn.tool_calls]
        ctx.append(Message(role=Role.ASSISTANT, content=turn.content, tool_calls=calls))
        ctx.iteration += 1
        self.recorder.record(
            EventKind.MODEL_TURN,
            ctx.context_path,
            {
                "content": turn.content,
                "tool_calls": [call.model_dump(mode="json") for call in calls],
                "finish_reason": turn.finish_reason.value,
            },
        )
        LOGGER.debug(f"[{ctx.path}] turn {ctx.iteration}: {len(calls)} call(s) {[c.name for c in calls]}")

        final_answer: Optional[str] = None
        for call in calls:
            self.recorder.record(EventKind.TOOL_CALL, ctx.context_path, call.model_dump(mode="json"))
            ctx.current_call_id = call.id
            try:
                observation = ctx.registry.dispatch(call, ctx)
            finally:
                ctx.current_call_id = None

            ctx.append(Message(role=Role.TOOL, content=observation.content, tool_call_id=call.id, name=call.name))
            self.recorder.record(
                EventKind.TOOL_RESULT,
                ctx.context_path,
                {"id": call.id, "name": call.name, "content": observation.content, "is_error": observation.is_error},
            )

            if call.name == FINAL_ANSWER_TOOL and not observation.is_error and isinstance(observation.data, dict):
                final_answer = observation.data.get("final_answer", final_answer)

        mode = ctx.agent.termination.mode
        if mode == TerminationMode.NO_TOOL_CALL and not calls:
            return StepOutcome(StepKind.TERMINATE, turn.content)
        if mode == TerminationMode.FINAL_ANSWER_TOOL and final_answer is not None:
            return StepOutcome(StepKind.TERMINATE, final_answer)
        return StepOutcome(StepKind.CONTINUE)

    def loop(self, ctx: ExecutionContext) -> Tuple[RunStatus, str]:
        """
        Step a context until it terminates or runs out of iterations.
        """
        while ctx.iteration < ctx.agent.max_iterations:
            outcome = self.step(ctx)
            if outcome.terminated:
                return RunStatus.COMPLETED, outcome.final_answer or ""

        if ctx.agent.termination.mode == TerminationMode.MAX_ITERATIONS_ONLY:
            return RunStatus.COMPLETED, ctx.last_assistant_content

        LOGGER.debug(f"[{ctx.path}] exhausted its {ctx.agent.max_iterations} iterations")
        return RunStatus.MAX_ITERATIONS_EXHAUSTED, ctx.last_assistant_content

    def delegate(self, parent: ExecutionContext, sub_agent: AgentSpec, arguments: Dict[str, Any]) -> DelegationResult:
        """
        Run a sub-agent in a fresh child context and return what crosses back to the parent.  The delegation
        is bracketed by delegation_start and delegation_end events on the parent context, even when the
        model backend fails in the middle of it.
        """
        segment = parent.child_segment(sub_agent.name)
        child_path = parent.context_path + (segment,)
        child_run_id = f"{parent.run_id}/{segment}"
        call_id = parent.current_call_id

        self.recorder.record(
            EventKind.DELEGATION_START,
            parent.context_path,
            {"child_path": list(child_path), "child_run_id": child_run_id, "call_id": call_id, "agent": sub_agent.name},
        )

        status, final_answer, iterations = RunStatus.ABORTED, "", 0
        error: Optional[str] = None
        try:
            try:
                child = self.new_context(
                    sub_agent,
                    render_child_input(arguments),
                    run_id=child_run_id,
                    context_path=child_path,
                    parent=parent,
                )
            except CONTEXT_ERRORS as e:
                LOGGER.warning(f"Failed to create the context of {child_run_id}: {e}")
                error = str(e)
            else:
                status, final_answer = self.loop(child)
                iterations = child.iteration
        except GatewayError as e:
            error = str(e)
            raise
        finally:
            payload: Dict[str, Any] = {
                "child_path": list(child_path),
                "child_run_id": child_run_id,
                "call_id": call_id,
                "status": status.value,
                "final_answer": final_answer,
            }
            if error is not None:
                payload["error"] = error
            self.recorder.record(EventKind.DELEGATION_END, parent.context_path, payload)

        return DelegationResult(child_run_id, child_path, status, final_answer, iterations, error)

    def _delegation_tool(
        self, ctx: ExecutionContext, sub_agent: AgentSpec, name: str, arguments: Dict[str, Any]
    ) -> Observation:
        result = self.delegate(ctx, sub_agent, arguments)
        if result.status == RunStatus.COMPLETED:
            return Observation(
                content=result.final_answer,
                data={"child_run_id": result.child_run_id, "status": result.status.value},
            )

        fields: Dict[str, Any] = {
            "child_run_id": result.child_run_id,
            "status": result.status.value,
            "final_answer": result.final_answer,
        }
        if result.error is not None:
            fields["message"] = result.error
        return Observation.failure("delegation_failed", **fields)

    def run(self, task: str, *, run_id: Optional[str] = None, seed: int = 0) -> RunResult:
        """
        Execute the framework on a task.  A model backend failure does not raise, it ends the run with the
        aborted status and the partial trajectory.
        """
        with self._lock:
            if self._started:
                raise RuntimeError("A runtime can only drive one run, create a new one")
            self._started = True

        root = self.framework.root_agent
        run_id = run_id or derive_run_id(self.framework, task, seed)
        if self.sampling is None:
            self.sampling = SamplingParams(seed=seed)

        self.recorder.open(
            TrajectoryMetadata(
                run_id=run_id,
                framework=self.framework.name,
                node_count=self.framework.node_count,
                task=task,
                dialect=self.dialect_hint or "openai-json",
            )
        )
        LOGGER.info(f"Run {run_id} of framework {self.framework.name} started")
        start = time.monotonic()

        status, final_answer, iterations = RunStatus.ABORTED, "", 0
        error: Optional[str] = None
        error_kind: Optional[str] = None
        try:
            ctx = self.new_context(root, task, run_id=run_id, context_path=(root.name,))
            status, final_answer = self.loop(ctx)
            iterations = ctx.iteration
        except (GatewayError, *CONTEXT_ERRORS) as e:
            LOGGER.error(f"Run {run_id} aborted: {e}")
            error, error_kind = str(e), type(e).__name__
        finally:
            self.env.close()

        payload: Dict[str, Any] = {"status": status.value, "final_answer": final_answer}
        if error is not None:
            payload["error"] = error
        self.recorder.record(EventKind.RUN_END, (root.name,), payload)

        LOGGER.info(f"Run {run_id} finished with status {status.value} in {time.monotonic() - start:.2f}s")
        return RunResult(
            run_id=run_id,
            status=status,
            final_answer=final_answer,
            trajectory=self.recorder.trajectory,
            iterations=iterations,
            error=error,
            error_kind=error_kind,
        )


def run_agent(
    cfg: FrameworkConfig,
    task: str,
    gateway: ModelGateway,
    recorder: Optional[TrajectoryRecorder] = None,
    *,
    run_id: Optional[str] = None,
    seed: int = 0,
    **options: Any,
) -> RunResult:
    """
    Execute a framework on a task, see AgentRuntime for the options.
    """
    return AgentRuntime(cfg, gateway, recorder, **options).run(task, run_id=run_id, seed=seed)


def step_agent(ctx: ExecutionContext) -> StepOutcome:
    """
    Do one iteration of the given context, with the gateway and namespace of its runtime.
    """
    if ctx.runtime is None:
        raise RuntimeError(f"{ctx} is not attached to a runtime")
    return ctx.runtime.step(ctx)


def delegate(parent_ctx: ExecutionContext, sub_agent: AgentSpec, arguments: Dict[str, Any]) -> DelegationResult:
    if parent_ctx.runtime is None:
        raise RuntimeError(f"{parent_ctx} is not attached to a runtime")
    return parent_ctx.runtime.delegate(parent_ctx, sub_agent, arguments)
