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

from agentscale.config.parser import (
    Finding,
    ValidationReport,
    config_digest,
    framework_to_dict,
    load_framework,
    parse_framework,
    serialize_framework,
    validate_framework,
)
from agentscale.config.schema import (
    DEFAULT_MAX_ITERATIONS,
    FINAL_ANSWER_TOOL,
    AgentRef,
    AgentSpec,
    FrameworkConfig,
    McpServerSpec,
    McpTransportKind,
    TerminationMode,
    TerminationPolicy,
    ToolKind,
    ToolRef,
)

__all__ = [
    "AgentRef",
    "AgentSpec",
    "DEFAULT_MAX_ITERATIONS",
    "FINAL_ANSWER_TOOL",
    "Finding",
    "FrameworkConfig",
    "McpServerSpec",
    "McpTransportKind",
    "TerminationMode",
    "TerminationPolicy",
    "ToolKind",
    "ToolRef",
    "ValidationReport",
    "config_digest",
    "framework_to_dict",
    "load_framework",
    "parse_framework",
    "serialize_framework",
    "validate_framework",
]
