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
import os
from typing import Any, Dict, List, Optional

import requests

from agentscale.exceptions import DialectError, MalformedResponse, TransportError
from agentscale.gateway.base import ModelGateway
from agentscale.gateway.models import FinishReason, ModelRequest, ModelTurn, ToolCall
from agentscale.trajectory.dialects.openai import message_to_openai
from agentscale.trajectory.dialects.registry import get_dialect

LOGGER = logging.getLogger(__name__)

ENV_URL = "NEX_GATEWAY_URL"
ENV_MODEL = "NEX_GATEWAY_MODEL"
ENV_KEY = "NEX_GATEWAY_KEY"

DEFAULT_URL = "http://localhost:8000/v1/chat/completions"
DEFAULT_MODEL = "default"

FINISH_REASONS = {
    "stop": FinishReason.STOP,
    "tool_calls": FinishReason.TOOL_CALLS,
    "function_call": FinishReason.TOOL_CALLS,
    "length": FinishReason.LENGTH,
}


class HttpGateway(ModelGateway):
    """
    Chat-completions backend.  Native tool calls are used when the remote model returns them, otherwise the
    content is parsed with the dialect hint of the request.
    """

    name = "http"

    def __init__(
        self,
        url: str,
        model: str,
        api_key: Optional[str] = None,
        *,
        timeout: float = 120,
        session: Optional[requests.Session] = None,
    ) -> None:
        self.url = url
        self.model = model
        self.timeout = timeout
        self.session = session or requests.Session()
        if api_key:
            self.session.headers["Authorization"] = f"Bearer {api_key}"

    @classmethod
    def from_env(cls, **kwargs: Any) -> "HttpGateway":
        url = os.environ.get(ENV_URL, DEFAULT_URL)
        model = os.environ.get(ENV_MODEL, DEFAULT_MODEL)
        for var, default in ((ENV_URL, DEFAULT_URL), (ENV_MODEL, DEFAULT_MODEL)):
            if var in os.environ:
                LOGGER.warning(f"{var} overrides the default value {default!r}")
        return cls(url, model, os.environ.get(ENV_KEY), **kwargs)

    def payload(self, request: ModelRequest) -> Dict[str, Any]:
        body: Dict[str, Any] = {
            "model": self.model,
            "messages": [message_to_openai(m) for m in request.messages],
            "temperature": request.sampling.temperature,
            "seed": request.sampling.seed,
        }
        if request.sampling.max_tokens is not None:
            body["max_tokens"] = request.sampling.max_tokens
        if request.available_tools:
            body["tools"] = [tool.to_openai() for tool in request.available_tools]
        return body

    def generate(self, request: ModelRequest) -> ModelTurn:
        try:
            response = self.session.post(self.url, json=self.payload(request), timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
        except requests.RequestException as e:
            raise TransportError(f"Failed to reach the model at {self.url}: {e}")
        except ValueError as e:
            raise MalformedResponse(f"The model answered with invalid json: {e}")

        try:
            choice = data["choices"][0]
            message = choice["message"]
        except (KeyError, IndexError, TypeError):
            raise MalformedResponse(f"The model response has no choice: {str(data)[:200]}")

        return self.to_turn(message, choice.get("finish_reason"), request.dialect_hint)

    def to_turn(self, message: Dict[str, Any], finish_reason: Optional[str], dialect_hint: Optional[str]) -> ModelTurn:
        content = message.get("content") or ""
        reason = FINISH_REASONS.get(finish_reason or "stop", FinishReason.STOP)

        calls: List[ToolCall] = []
        for raw in message.get("tool_calls") or []:
            function = raw.get("function", {})
            arguments = function.get("arguments", {})
            try:
                if isinstance(arguments, str):
                    arguments = json.loads(arguments) if arguments.strip() else {}
            except json.JSONDecodeError:
                # Keep the raw payload for the quality judge, the turn is treated as a plain answer
                LOGGER.warning(f"Unparseable arguments for tool call {function.get('name')!r}, keeping the raw content")
                raw_payload = json.dumps(message.get("tool_calls"), ensure_ascii=False)
                return ModelTurn(content=f"{content}\n{raw_payload}".strip(), finish_reason=FinishReason.STOP)
            calls.append(ToolCall(id=raw.get("id", ""), name=function.get("name", ""), arguments=arguments))

        if not calls and dialect_hint and dialect_hint != "openai-json":
            try:
                content, calls = get_dialect(dialect_hint).decode_assistant(content)
            except DialectError as e:
                LOGGER.warning(f"Failed to parse the model output as {dialect_hint}: {e}")

        if calls:
            return ModelTurn(content=content, tool_calls=calls, finish_reason=FinishReason.TOOL_CALLS)

        if reason == FinishReason.TOOL_CALLS:
            reason = FinishReason.STOP
        return ModelTurn(content=content, finish_reason=reason)

    def close(self) -> None:
        self.session.close()
