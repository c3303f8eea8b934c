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
from typing import List, Set

import numpy as np

from agentscale.gateway.base import ModelGateway
from agentscale.gateway.models import ModelRequest, ModelTurn, Role, ToolCall
from agentscale.helpers.schema import example_arguments
from agentscale.helpers.utils import derive_seed

LOGGER = logging.getLogger(__name__)

FINAL_ANSWER_TOOL = "final_answer"

# Tools the policy never calls on its own, they need state the policy doesn't track
SKIPPED_TOOLS = {"fs_read", "storage_get"}

CLOSINGS = (
    "All steps are done.",
    "That covers the request.",
    "Here is the outcome.",
    "The task is complete.",
)


class PolicyGateway(ModelGateway):
    """
    Deterministic synthetic policy, used to generate trajectories without a model.  In every context it
    calls each available tool once, in declaration order, with example arguments built from the tool
    input schema, and then answers.  Sub-agents being tools, this delegates once to every sub-agent.

    The output only depends on the seed, the context path and the content of the request.
    """

    name = "policy"

    def __init__(self, seed: int = 0, *, max_calls: int = 8) -> None:
        self.seed = seed
        self.max_calls = max_calls

    def _called(self, request: ModelRequest) -> Set[str]:
        return {call.name for m in request.messages if m.role == Role.ASSISTANT for call in m.tool_calls}

    def _task(self, request: ModelRequest) -> str:
        return next((m.content for m in request.messages if m.role == Role.USER), "")

    def generate(self, request: ModelRequest) -> ModelTurn:
        rng = np.random.default_rng(derive_seed(self.seed, request.path, self._task(request)))
        prefix = f"[{request.path}] step {request.step}:"

        called = self._called(request)
        pending: List[str] = [
            t.name
            for t in request.available_tools
            if t.name not in called and t.name != FINAL_ANSWER_TOOL and t.name not in SKIPPED_TOOLS
        ]
        tools = {t.name: t for t in request.available_tools}

        if pending and request.step < self.max_calls:
            tool = tools[pending[0]]
            arguments = example_arguments(tool.input_schema)
            LOGGER.debug(f"{prefix} calling {tool.name}")
            return ModelTurn.call(f"{prefix} calling {tool.name}.", ToolCall(name=tool.name, arguments=arguments))

        observations = [m.content for m in request.messages if m.role == Role.TOOL]
        closing = CLOSINGS[int(rng.integers(len(CLOSINGS)))]
        summary = f"{prefix} {closing} Used {len(observations)} tool result(s)."
        if observations:
            summary += f" Last result: {observations[-1][:200]}"

        if FINAL_ANSWER_TOOL in tools:
            answer = ToolCall(name=FINAL_ANSWER_TOOL, arguments={"answer": summary})
            return ModelTurn.call(f"{prefix} submitting the answer.", answer)

        return ModelTurn.answer(summary)
