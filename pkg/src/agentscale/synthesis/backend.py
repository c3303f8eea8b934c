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
from typing import Any, Callable, Dict, List

import numpy as np
from pydantic import BaseModel, Field

from agentscale.exceptions import AgentScaleError
from agentscale.gateway.base import ModelGateway
from agentscale.gateway.models import Message, ModelRequest, Role, SamplingParams
from agentscale.helpers.utils import canonical_json, derive_seed, digest

LOGGER = logging.getLogger(__name__)

DEFAULT_SYSTEM_PROMPT = "You are a careful generator of structured data."


class GenerationRequest(BaseModel):
    """
    One call to a generator: the task says what is expected back, the prompt is what a model would read,
    the payload is the same information in structured form.
    """

    task: str
    prompt: str = ""
    payload: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    attempt: int = 0
    feedback: List[str] = Field(default_factory=list)

    @property
    def fingerprint(self) -> str:
        return digest(self.task, self.payload, self.seed, self.attempt, length=16)

    def render(self) -> str:
        """
        The prompt as sent to a model: instructions, structured input, then what went wrong last time.
        """
        parts = [self.prompt.strip(), "INPUT:\n" + canonical_json(self.payload)]
        if self.feedback:
            parts.append("Your previous answer was rejected:\n" + "\n".join(f"- {f}" for f in self.feedback))
        return "\n\n".join(p for p in parts if p)


class GeneratorBackend:
    """
    Parent class for everything producing text for the synthesis stages: a model behind a gateway, a
    deterministic template engine or a judge.  Generator output is never trusted, callers validate it.
    """

    name = "generator"

    def generate(self, request: GenerationRequest) -> str:
        raise NotImplementedError(f"Generator backend {type(self).__name__} has no generate implementation")


TemplateFn = Callable[[GenerationRequest, np.random.Generator], str]

TEMPLATES: Dict[str, TemplateFn] = {}


def template(task: str) -> Callable[[TemplateFn], TemplateFn]:
    """
    Register the template answering a generation task.  Templates live next to the stage using them.
    """

    def register(fn: TemplateFn) -> TemplateFn:
        TEMPLATES[task] = fn
        return fn

    return register


class TemplateBackend(GeneratorBackend):
    """
    Deterministic generator: pattern-keyed templates combined with seeded draws over fixed lexicons.  The
    output only depends on the backend seed and the request.
    """

    name = "template"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def rng(self, request: GenerationRequest) -> np.random.Generator:
        return np.random.default_rng(derive_seed(self.seed, request.fingerprint))

    def generate(self, request: GenerationRequest) -> str:
        fn = TEMPLATES.get(request.task)
        if fn is None:
            raise AgentScaleError(f"The template backend has no template for {request.task!r}, known: {sorted(TEMPLATES)}")
        return fn(request, self.rng(request))


class GatewayBackend(GeneratorBackend):
    """
    Generate through any model gateway, the request is rendered as a single user message.
    """

    name = "gateway"

    def __init__(self, gateway: ModelGateway, *, system_prompt: str = DEFAULT_SYSTEM_PROMPT) -> None:
        self.gateway = gateway
        self.system_prompt = system_prompt

    def generate(self, request: GenerationRequest) -> str:
        model_request = ModelRequest(
            messages=[
                Message(role=Role.SYSTEM, content=self.system_prompt),
                Message(role=Role.USER, content=request.render()),
            ],
            sampling=SamplingParams(seed=request.seed),
            run_id=f"generate-{request.fingerprint}",
            context_path=(request.task,),
        )
        LOGGER.debug(f"Generating {request.task} (attempt {request.attempt}) through {self.gateway.name}")
        return self.gateway.generate(model_request).content


class ScriptedBackend(GeneratorBackend):
    """
    Replay canned outputs in order, the last one is repeated once the others are used up.  Every request is
    kept, so that tests can look at what a stage was given.
    """

    name = "scripted"

    def __init__(self, outputs: List[str]) -> None:
        if not outputs:
            raise ValueError("A scripted backend needs at least one output")
        self.outputs = list(outputs)
        self.requests: List[GenerationRequest] = []
        self._lock = threading.Lock()

    def generate(self, request: GenerationRequest) -> str:
        with self._lock:
            index = min(len(self.requests), len(self.outputs) - 1)
            self.requests.append(request)
        return self.outputs[index]
