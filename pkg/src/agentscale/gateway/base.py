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

from abc import abstractmethod

from agentscale.gateway.models import ModelRequest, ModelTurn


class ModelGateway:
    """
    Parent class for all model backends.  A backend turns the current state of one context into the
    next assistant turn.

    Backends may be shared by many runs executing in parallel, so generate must be thread safe.
    """

    name = "abstract"

    @abstractmethod
    def generate(self, request: ModelRequest) -> ModelTurn:
        """
        This has to be implemented by inheriting classes.

        :raises GatewayError: If the backend can not produce a turn
        """

    def close(self) -> None:
        """
        This can be extended by inheriting classes, to release any resource held by the backend.
        """
