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
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from agentscale.config.parser import framework_to_dict, parse_framework, serialize_framework
from agentscale.config.schema import AgentRef, AgentSpec, FrameworkConfig, McpServerSpec, ToolKind, ToolRef
from agentscale.exceptions import AgentScaleError, UnboundSkill
from agentscale.helpers.utils import digest
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, template
from agentscale.synthesis.models import ActionKind, BuildPlan, FrameworkDescription, PlanRole, SeedKind
from agentscale.synthesis.planner import plan_framework
from agentscale.synthesis.stubs import CustomToolSpec, synthesize_custom_tool

LOGGER = logging.getLogger(__name__)

DEFAULT_MODEL = "default"

PROMPT_OPENINGS: Dict[str, Tuple[str, ...]] = {
    "single-react": (
        "You solve tasks on your own, one tool call at a time.",
        "Work through the task step by step and use your tools when they help.",
    ),
    "pipeline": (
        "You are one stage of a pipeline, do your part and pass a clean result on.",
        "Your output is the input of the next stage, keep it precise.",
    ),
    "manager-workers": (
        "You are part of a team, every member owns one kind of work.",
        "Split the work sensibly and report results, not process.",
    ),
    "hierarchical-tree": (
        "You are part of an organisation with several levels, escalate only finished work.",
        "Your team belongs to a larger structure, keep your report short and factual.",
    ),
    "fixed-workflow": (
        "You execute one step of a fixed workflow, never skip or reorder steps.",
        "Follow the procedure exactly, each step depends on the previous one.",
    ),
}


@template("system_prompt")
def system_prompt_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    openings = PROMPT_OPENINGS[str(request.payload["pattern"])]
    return openings[int(rng.integers(len(openings)))]


class FrameworkBuild(BaseModel):
    """
    What the builder produces: the config, the sources of its custom tools keyed by their path relative to the
    config, and the provenance of the build.
    """

    config: FrameworkConfig
    stubs: Dict[str, str] = Field(default_factory=dict)
    provenance: Dict[str, Any] = Field(default_factory=dict)
    plan: BuildPlan


def _system_prompt(opening: str, role: PlanRole, inventory: List[str]) -> str:
    parts = [opening.strip(), f"## Role\nYou are {role.name}, {role.persona}."]
    if inventory:
        parts.append("## Meta-skills\n" + "\n".join(inventory))
    return "\n\n".join(parts)


class AgentBuilder:
    """
    Turn the roles of a plan into agent specs, realizing every meta-skill with the actions it is bound to.
    Custom tools are synthesized once per plan.
    """

    def __init__(self, plan: BuildPlan, gen: GeneratorBackend, *, seed: int = 0, smoke: bool = True) -> None:
        self.plan = plan
        self.gen = gen
        self.seed = seed
        self.smoke = smoke
        self.stubs: Dict[str, str] = {}
        self._custom: Dict[str, ToolRef] = {}

    def _custom_tool(self, name: str) -> ToolRef:
        if name not in self._custom:
            seed = self.plan.seed(name)
            assert seed is not None
            spec = CustomToolSpec(
                name=seed.name,
                description=seed.description,
                input_schema=seed.input_schema,
                behavior=seed.behavior or "template",
            )
            ref, source = synthesize_custom_tool(spec, self.gen, seed=self.seed, smoke=self.smoke)
            self._custom[name] = ref
            self.stubs[ref.source] = source
        return self._custom[name]

    def build(self, role: PlanRole) -> AgentSpec:
        """
        :raises UnboundSkill: If a meta-skill of the role has no usable action
        """
        tools: Dict[str, ToolRef] = {}
        servers: Dict[str, McpServerSpec] = {}
        inventory: List[str] = []

        for skill in role.meta_skills:
            bindings = self.plan.skill_to_actions.get(skill, [])
            if not bindings:
                raise UnboundSkill(f"Meta-skill {skill} of role {role.name} is not bound to any action")

            actions: List[str] = []
            for binding in bindings:
                if binding.kind == ActionKind.SUB_AGENT:
                    actions.append(f"delegate to {binding.target}")
                    continue

                seed = self.plan.seed(binding.target)
                if seed is None:
                    raise UnboundSkill(f"Meta-skill {skill} of role {role.name} uses an unknown capability {binding.target}")

                if seed.kind == SeedKind.MCP:
                    server_name = seed.server or "mcp"
                    spec = McpServerSpec(name=server_name, endpoint=seed.endpoint, allowed_tools=[])
                    server = servers.setdefault(server_name, spec)
                    assert server.allowed_tools is not None
                    if seed.remote_name not in server.allowed_tools:
                        server.allowed_tools.append(seed.remote_name)
                    actions.append(f"call {seed.remote_name} on {server_name}")
                elif seed.kind == SeedKind.CUSTOM:
                    tools.setdefault(seed.name, self._custom_tool(seed.name))
                    actions.append(f"run {seed.name}")
                else:
                    tools.setdefault(seed.name, ToolRef(name=seed.name, kind=ToolKind.BUILTIN, description=seed.description))
                    actions.append(f"use {seed.name}")

            inventory.append(f"- {skill}: {', '.join(actions)}")

        opening = self.gen.generate(
            GenerationRequest(
                task="system_prompt",
                prompt="Write the opening sentence of the system prompt of this agent.",
                payload={
                    "pattern": self.plan.pattern.value,
                    "role": role.name,
                    "persona": role.persona,
                    "meta_skills": role.meta_skills,
                },
                seed=self.seed,
            )
        )

        return AgentSpec(
            name=role.name,
            system_prompt=_system_prompt(opening, role, inventory),
            model=DEFAULT_MODEL,
            description=f"Hand a task over to {role.name}, {role.persona}.",
            tools=list(tools.values()),
            sub_agents=[AgentRef(ref=child.name) for child in self.plan.children(role.name)],
            mcp_servers=list(servers.values()),
        )


def build_agents(plan: BuildPlan, gen: GeneratorBackend, *, seed: int = 0) -> List[AgentSpec]:
    """
    One agent spec per role of the plan, in plan order.  Children are referenced by name.
    """
    builder = AgentBuilder(plan, gen, seed=seed)
    return [builder.build(role) for role in plan.roles]


class FrameworkBuilder:
    """
    Build complete frameworks from descriptions: plan, realize the roles, assemble the tree and check that
    the result survives a serialization round trip through the config parser.
    """

    def __init__(self, gen: GeneratorBackend, *, seed: int = 0, smoke: bool = True) -> None:
        self.gen = gen
        self.seed = seed
        self.smoke = smoke

    def build(self, desc: FrameworkDescription) -> FrameworkBuild:
        plan = plan_framework(desc, self.gen, seed=self.seed)
        builder = AgentBuilder(plan, self.gen, seed=self.seed, smoke=self.smoke)
        agents = {role.name: builder.build(role) for role in plan.roles}

        provenance = {
            "pattern": plan.pattern.value,
            "seed": self.seed,
            "generator": self.gen.name,
            "notes": list(plan.notes),
            "description_digest": digest(desc.text, length=16),
            "node_count": plan.node_count,
            "depth": plan.depth,
        }
        suffix = digest(desc.model_dump(mode="json"), self.seed, length=8)
        config = FrameworkConfig(
            name=f"{plan.pattern.value.replace('-', '_')}_{suffix}",
            description=desc.text,
            metadata={"provenance": provenance},
            root_agent=agents[plan.root.name],
            agents=[agents[role.name] for role in plan.roles if role.parent is not None],
        )

        reparsed = parse_framework(serialize_framework(config))
        if framework_to_dict(reparsed) != framework_to_dict(config):
            raise AgentScaleError(f"Framework {config.name} does not survive a serialization round trip")

        LOGGER.info(
            f"Framework {config.name} built: pattern {plan.pattern.value}, "
            f"{reparsed.node_count} node(s), depth {reparsed.depth}"
        )
        return FrameworkBuild(config=reparsed, stubs=dict(builder.stubs), provenance=provenance, plan=plan)


def build_framework(desc: FrameworkDescription, gen: GeneratorBackend, *, seed: int = 0) -> FrameworkConfig:
    return FrameworkBuilder(gen, seed=seed).build(desc).config
