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

from agentscale.synthesis.backend import GatewayBackend, GenerationRequest, GeneratorBackend, ScriptedBackend, TemplateBackend
from agentscale.synthesis.builder import AgentBuilder, FrameworkBuild, FrameworkBuilder, build_agents, build_framework
from agentscale.synthesis.corpus import CAPABILITY_SEEDS, seed_descriptions
from agentscale.synthesis.models import (
    ActionBinding,
    ActionKind,
    BuildPlan,
    CapabilitySeed,
    Constraints,
    FrameworkDescription,
    PlanRole,
    SeedKind,
    WorkflowPattern,
)
from agentscale.synthesis.planner import plan_framework
from agentscale.synthesis.stubs import CustomToolSpec, synthesize_custom_tool

__all__ = [
    "ActionBinding",
    "ActionKind",
    "AgentBuilder",
    "BuildPlan",
    "CAPABILITY_SEEDS",
    "CapabilitySeed",
    "Constraints",
    "CustomToolSpec",
    "FrameworkBuild",
    "FrameworkBuilder",
    "FrameworkDescription",
    "GatewayBackend",
    "GenerationRequest",
    "GeneratorBackend",
    "PlanRole",
    "ScriptedBackend",
    "SeedKind",
    "TemplateBackend",
    "WorkflowPattern",
    "build_agents",
    "build_framework",
    "plan_framework",
    "seed_descriptions",
    "synthesize_custom_tool",
]
