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
import re
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pydantic

from agentscale.config.parser import IDENTIFIER
from agentscale.exceptions import PlanRejected
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, template
from agentscale.synthesis.models import (
    PATTERN_DEFAULTS,
    ActionBinding,
    ActionKind,
    BuildPlan,
    CapabilitySeed,
    FrameworkDescription,
    PlanRole,
    SeedKind,
    WorkflowPattern,
)

LOGGER = logging.getLogger(__name__)

MAX_ATTEMPTS = 3

PLAN_PROMPT = """You design multi-agent frameworks.  Read the framework description, choose one workflow pattern among
single-react, pipeline, manager-workers, hierarchical-tree and fixed-workflow, and decompose the work into roles.
Answer with a json object {"pattern", "roles": [{"name", "persona", "meta_skills", "parent"}], "skill_to_actions":
{meta_skill: [{"kind": "tool" | "sub-agent" | "mcp", "target"}]}}.  Only bind the capabilities listed in the input."""

ROOT_ROLES: Dict[WorkflowPattern, str] = {
    WorkflowPattern.SINGLE_REACT: "assistant",
    WorkflowPattern.PIPELINE: "coordinator",
    WorkflowPattern.MANAGER_WORKERS: "manager",
    WorkflowPattern.HIERARCHICAL_TREE: "director",
    WorkflowPattern.FIXED_WORKFLOW: "workflow_runner",
}

LEADERS = {"cto", "manager", "director", "coordinator", "lead", "workflow_runner", "assistant"}

PERSONAS: Dict[str, str] = {
    "assistant": "a helpful generalist who solves the task end to end",
    "coordinator": "an organised coordinator who moves the work from one stage to the next",
    "manager": "a manager who splits the task and hands the pieces to the right people",
    "director": "a director who owns the outcome and steers several teams",
    "workflow_runner": "a strict operator who runs every step of a fixed procedure in order",
    "lead": "a team lead who reviews and integrates the work of the team",
    "cto": "a pragmatic technical leader who breaks work down and delegates it",
    "software_engineer": "a software engineer who writes, runs and fixes code",
    "researcher": "a meticulous researcher who gathers and cross-checks sources",
    "analyst": "a data analyst who turns raw numbers into findings",
    "writer": "a clear technical writer",
    "reviewer": "a demanding reviewer who looks for mistakes",
    "tester": "a tester who tries to break things before users do",
    "planner": "a planner who turns goals into ordered steps",
    "summarizer": "a summarizer who keeps only what matters",
    "translator": "a translator fluent in English and Chinese",
    "designer": "a designer who cares about structure and layout",
    "data_engineer": "a data engineer who cleans and reshapes datasets",
    "critic": "a critic who argues against the current proposal",
    "fact_checker": "a fact checker who verifies every claim",
    "editor": "an editor who polishes text for publication",
    "scheduler": "a scheduler who books and orders tasks",
    "librarian": "a librarian who files and retrieves documents",
    "architect": "a software architect who designs components and their interfaces",
    "support_agent": "a support agent who answers user questions patiently",
    "accountant": "an accountant who checks figures and totals",
}

WORKERS = [name for name in PERSONAS if name not in LEADERS]

PATTERN_KEYWORDS: List[Tuple[WorkflowPattern, Tuple[str, ...]]] = [
    (WorkflowPattern.FIXED_WORKFLOW, ("fixed workflow", "fixed-workflow", "fixed sequence", "fixed procedure")),
    (WorkflowPattern.PIPELINE, ("pipeline", "stages")),
    (WorkflowPattern.HIERARCHICAL_TREE, ("hierarch", "tree", "departments", "layers", "levels")),
    (WorkflowPattern.MANAGER_WORKERS, ("manager", "delegat", "workers", "team")),
    (WorkflowPattern.SINGLE_REACT, ("single", "one assistant", "an assistant")),
]

NODES_RE = re.compile(r"\b(\d+)\s+(?:agents|nodes|roles)\b", re.IGNORECASE)
DEPTH_RE = re.compile(r"\b(\d+)\s+(?:layers|levels)\b|\bdepth\s+(?:of\s+)?(\d+)\b", re.IGNORECASE)


def parse_targets(text: str) -> Tuple[Optional[int], Optional[int]]:
    """
    Extract the requested node count and depth from a description, if it states them.
    """
    nodes = NODES_RE.search(text)
    depth = DEPTH_RE.search(text)
    return (
        int(nodes.group(1)) if nodes else None,
        int(depth.group(1) or depth.group(2)) if depth else None,
    )


def choose_pattern(text: str, nodes: Optional[int]) -> WorkflowPattern:
    if nodes == 1:
        return WorkflowPattern.SINGLE_REACT

    lowered = text.lower()
    for pattern, keywords in PATTERN_KEYWORDS:
        if pattern == WorkflowPattern.SINGLE_REACT and nodes is not None:
            continue
        if any(keyword in lowered for keyword in keywords):
            return pattern

    if re.search(r"\bcto\b", lowered):
        return WorkflowPattern.MANAGER_WORKERS
    return WorkflowPattern.MANAGER_WORKERS if nodes is not None else WorkflowPattern.SINGLE_REACT


def mentioned_roles(text: str) -> List[str]:
    """
    The lexicon roles named in the description, in order of appearance.
    """
    lowered = text.lower()
    found: List[Tuple[int, str]] = []
    for name in PERSONAS:
        match = re.search(r"\b" + re.escape(name.replace("_", " ")) + r"s?\b", lowered)
        if match:
            found.append((match.start(), name))
    return [name for _, name in sorted(found)]


def layer_sizes(nodes: int, depth: int) -> List[int]:
    """
    Spread the nodes over the layers, the root alone on the first one, deeper layers filled first.
    """
    depth = max(1, min(depth, nodes))
    sizes = [1] * depth
    extra = nodes - depth
    while extra > 0:
        for layer in range(depth - 1, 0, -1):
            if extra == 0:
                break
            sizes[layer] += 1
            extra -= 1
    return sizes


def _role_names(count: int, pattern: WorkflowPattern, text: str, rng: np.random.Generator) -> List[str]:
    mentioned = mentioned_roles(text)
    names: List[str] = []
    if mentioned and (mentioned[0] in LEADERS or count == 1):
        names.append(mentioned.pop(0))
    else:
        names.append(ROOT_ROLES[pattern])

    pool = [m for m in mentioned if m not in names]
    pool += [WORKERS[i] for i in rng.permutation(len(WORKERS)) if WORKERS[i] not in names and WORKERS[i] not in pool]

    k = 2
    while len(names) < count:
        candidate = pool.pop(0) if pool else None
        if candidate is None:
            base = WORKERS[(len(names) + k) % len(WORKERS)]
            candidate = f"{base}_{k}"
            k += 1
        if candidate not in names:
            names.append(candidate)
    return names


def _persona(name: str, pattern: WorkflowPattern, children: List[str]) -> str:
    base = PERSONAS.get(name.rstrip("_0123456789").rstrip("_"), PERSONAS.get(name, "a specialist"))
    if children and pattern == WorkflowPattern.PIPELINE:
        return f"{base}; the pipeline stages are {' -> '.join(children)}, the output of a stage feeds the next"
    if children and pattern == WorkflowPattern.FIXED_WORKFLOW:
        return f"{base}; the workflow always runs {', then '.join(children)}"
    return base


@template("plan_framework")
def plan_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    text = str(request.payload["text"])
    constraints = request.payload.get("constraints", {})
    seeds = [CapabilitySeed.model_validate(s) for s in request.payload.get("capability_seeds", [])]

    text_nodes, text_depth = parse_targets(text)
    mentioned = mentioned_roles(text)
    nodes = constraints.get("target_nodes") or text_nodes or (len(mentioned) if len(mentioned) > 1 else None)
    pattern = choose_pattern(text, nodes)
    default_nodes, default_depth = PATTERN_DEFAULTS[pattern]
    nodes = nodes or default_nodes
    depth = constraints.get("target_depth") or text_depth or default_depth
    depth = min(depth, nodes)
    if nodes > 1:
        depth = max(depth, 2)

    sizes = layer_sizes(nodes, depth)
    names = _role_names(nodes, pattern, text, rng)

    parents: Dict[str, Optional[str]] = {}
    layers: List[List[str]] = []
    cursor = 0
    for i, size in enumerate(sizes):
        layer = names[cursor : cursor + size]
        cursor += size
        for j, name in enumerate(layer):
            parents[name] = layers[i - 1][j % len(layers[i - 1])] if i > 0 else None
        layers.append(layer)

    roles: List[Dict[str, Any]] = []
    skills: Dict[str, List[Dict[str, str]]] = {}
    for name in names:
        children = [child for child in names if parents[child] == name]
        meta_skills: List[str] = []
        if children:
            skill = f"coordinate_{name}"
            meta_skills.append(skill)
            skills[skill] = [{"kind": ActionKind.SUB_AGENT.value, "target": child} for child in children]
        elif seeds:
            count = min(len(seeds), int(rng.integers(1, 3)))
            for index in sorted(rng.choice(len(seeds), size=count, replace=False)):
                seed = seeds[int(index)]
                skill = f"use_{seed.name}"
                meta_skills.append(skill)
                kind = ActionKind.MCP if seed.kind == SeedKind.MCP else ActionKind.TOOL
                skills[skill] = [{"kind": kind.value, "target": seed.name}]

        roles.append(
            {"name": name, "persona": _persona(name, pattern, children), "meta_skills": meta_skills, "parent": parents[name]}
        )

    return json.dumps({"pattern": pattern.value, "roles": roles, "skill_to_actions": skills})


def plan_problems(plan: BuildPlan, desc: FrameworkDescription) -> List[str]:
    """
    Everything wrong with a plan, as feedback for the generator.  Depth is not checked here, it is clamped.
    """
    problems: List[str] = []
    names = [role.name for role in plan.roles]
    if not names:
        return ["the plan has no role"]

    for name in sorted({n for n in names if names.count(n) > 1}):
        problems.append(f"role name {name!r} is used more than once")
    for name in names:
        if not IDENTIFIER.match(name):
            problems.append(f"role name {name!r} is not an identifier")

    roots = [role.name for role in plan.roles if role.parent is None]
    if len(roots) != 1:
        problems.append(f"the plan must have exactly one root role, got {roots}")

    for role in plan.roles:
        if role.parent is not None and role.parent not in names:
            problems.append(f"role {role.name} has an unknown parent {role.parent!r}")

        seen = {role.name}
        current = plan.role(role.parent) if role.parent else None
        while current is not None:
            if current.name in seen:
                problems.append(f"role {role.name} is part of a parent cycle")
                break
            seen.add(current.name)
            current = plan.role(current.parent) if current.parent else None

    for role in plan.roles:
        for skill in role.meta_skills:
            bindings = plan.skill_to_actions.get(skill, [])
            if not bindings:
                problems.append(f"meta-skill {skill!r} of role {role.name} is not bound to any action")
            for binding in bindings:
                problems.extend(_binding_problems(plan, desc, role, skill, binding))

    if not 1 <= plan.node_count <= desc.constraints.max_nodes:
        problems.append(f"the plan has {plan.node_count} roles, expected between 1 and {desc.constraints.max_nodes}")

    return problems


def _binding_problems(
    plan: BuildPlan, desc: FrameworkDescription, role: PlanRole, skill: str, binding: ActionBinding
) -> List[str]:
    if binding.kind == ActionKind.SUB_AGENT:
        target = plan.role(binding.target)
        if target is None or target.parent != role.name:
            return [f"meta-skill {skill!r} delegates to {binding.target!r}, which is not a child of {role.name}"]
        return []

    seed = desc.seed(binding.target)
    if seed is None:
        return [f"meta-skill {skill!r} uses {binding.target!r}, which is not one of the available capabilities"]
    if (binding.kind == ActionKind.MCP) != (seed.kind == SeedKind.MCP):
        kind = seed.kind.value
        return [f"meta-skill {skill!r} binds {binding.target!r} as {binding.kind.value} but it is a {kind} capability"]
    return []


def flatten_plan(plan: BuildPlan) -> BuildPlan:
    """
    Fold every role into the root, for frameworks limited to one layer.  Delegation bindings are dropped,
    the other skills of the folded roles move to the root.
    """
    flat = plan.model_copy(deep=True)
    root = flat.root
    for role in flat.roles:
        if role is not root:
            root.meta_skills.extend(skill for skill in role.meta_skills if skill not in root.meta_skills)

    actions: Dict[str, List[ActionBinding]] = {}
    for skill in list(root.meta_skills):
        bindings = [b for b in flat.skill_to_actions.get(skill, []) if b.kind != ActionKind.SUB_AGENT]
        if bindings:
            actions[skill] = bindings
        else:
            root.meta_skills.remove(skill)

    folded = len(flat.roles) - 1
    flat.roles = [root]
    flat.skill_to_actions = actions
    flat.pattern = WorkflowPattern.SINGLE_REACT
    flat.notes.append(f"depth {plan.depth} exceeds max_depth 1, {folded} role(s) folded into {root.name}")
    LOGGER.warning(f"Plan depth {plan.depth} flattened, {folded} role(s) folded into {root.name}")
    return flat


def clamp_depth(plan: BuildPlan, max_depth: int) -> BuildPlan:
    """
    Re-parent the roles deeper than max_depth under their ancestor of layer max_depth - 1.  The delegation
    skills follow the roles they delegate to.
    """
    depth = plan.depth
    if depth <= max_depth:
        return plan
    if max_depth < 2:
        return flatten_plan(plan)

    clamped = plan.model_copy(deep=True)
    ancestors: Dict[str, List[str]] = {}
    for role in plan.roles:
        chain: List[str] = []
        current = plan.role(role.parent) if role.parent else None
        while current is not None:
            chain.insert(0, current.name)
            current = plan.role(current.parent) if current.parent else None
        ancestors[role.name] = chain

    moved = 0
    for role in clamped.roles:
        chain = ancestors[role.name]
        if len(chain) < max_depth:
            continue

        new_parent = chain[max_depth - 2]
        old_parent = role.parent
        role.parent = new_parent
        moved += 1

        # Move the delegation binding from the old parent to the new one
        holder = clamped.role(old_parent) if old_parent else None
        for skill in list(holder.meta_skills if holder else []):
            bindings = clamped.skill_to_actions.get(skill, [])
            remaining = [b for b in bindings if not (b.kind == ActionKind.SUB_AGENT and b.target == role.name)]
            if len(remaining) == len(bindings):
                continue
            if remaining:
                clamped.skill_to_actions[skill] = remaining
            else:
                clamped.skill_to_actions.pop(skill, None)
                assert holder is not None
                holder.meta_skills.remove(skill)

        receiver = clamped.role(new_parent)
        assert receiver is not None
        skill = f"coordinate_{new_parent}"
        if skill not in receiver.meta_skills:
            receiver.meta_skills.append(skill)
        clamped.skill_to_actions.setdefault(skill, []).append(ActionBinding(kind=ActionKind.SUB_AGENT, target=role.name))

    clamped.notes.append(f"depth {depth} exceeds max_depth {max_depth}, {moved} role(s) re-parented")
    LOGGER.warning(f"Plan depth {depth} clamped to {max_depth}, {moved} role(s) re-parented")
    return clamped


def parse_plan(raw: str, desc: FrameworkDescription) -> BuildPlan:
    """
    :raises ValueError: If the generator output is not a plan
    """
    text = raw.strip()
    if text.startswith("```"):
        text = text.strip("`").partition("\n")[2]
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"the answer is not json: {e.msg}")
    if not isinstance(data, dict):
        raise ValueError("the answer must be a json object")

    try:
        return BuildPlan.model_validate({**data, "capability_seeds": [s.model_dump() for s in desc.capability_seeds]})
    except pydantic.ValidationError as e:
        raise ValueError(f"the answer does not match the plan schema: {e.errors()[0]['msg']} at {e.errors()[0]['loc']}")


def plan_framework(
    desc: FrameworkDescription,
    gen: GeneratorBackend,
    *,
    seed: int = 0,
    max_attempts: int = MAX_ATTEMPTS,
) -> BuildPlan:
    """
    Ask the generator for a plan until one passes validation.  Rejected plans are sent back with the list
    of their problems.

    :raises PlanRejected: If no valid plan came out of max_attempts attempts
    """
    payload = {
        "text": desc.text,
        "capability_seeds": [s.model_dump(mode="json") for s in desc.capability_seeds],
        "constraints": desc.constraints.model_dump(mode="json"),
    }

    problems: List[str] = []
    for attempt in range(max_attempts):
        raw = gen.generate(
            GenerationRequest(
                task="plan_framework", prompt=PLAN_PROMPT, payload=payload, seed=seed, attempt=attempt, feedback=problems
            )
        )
        try:
            plan = parse_plan(raw, desc)
        except ValueError as e:
            problems = [str(e)]
        else:
            problems = plan_problems(plan, desc)
            if not problems:
                return clamp_depth(plan, desc.constraints.max_depth)

        LOGGER.warning(f"Plan attempt {attempt + 1}/{max_attempts} rejected: {problems}")

    raise PlanRejected(f"No valid plan after {max_attempts} attempts", problems)
