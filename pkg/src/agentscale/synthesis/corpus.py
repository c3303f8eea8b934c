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

from typing import List

import numpy as np

from agentscale.helpers.utils import derive_seed
from agentscale.synthesis.models import CapabilitySeed, Constraints, FrameworkDescription, SeedKind, WorkflowPattern


def _text_schema(field: str = "text") -> dict:
    return {"type": "object", "properties": {field: {"type": "string"}}, "required": [field]}


CAPABILITY_SEEDS: List[CapabilitySeed] = [
    CapabilitySeed(name="fs_write", description="Write a file of the shared workspace."),
    CapabilitySeed(name="fs_read", description="Read a file of the shared workspace."),
    CapabilitySeed(name="fs_list", description="List the files of the shared workspace."),
    CapabilitySeed(name="storage_put", description="Store a value in the run storage."),
    CapabilitySeed(name="storage_get", description="Read a value of the run storage."),
    CapabilitySeed(name="echo", description="Return the given message unchanged."),
    CapabilitySeed(
        name="calc_add",
        description="Add two numbers on the calculator server.",
        input_schema={
            "type": "object",
            "properties": {"a": {"type": "number"}, "b": {"type": "number"}},
            "required": ["a", "b"],
        },
        kind=SeedKind.MCP,
        server="calculator",
        remote="add",
    ),
    CapabilitySeed(
        name="text_upper",
        description="Upper-case a text on the text server.",
        input_schema=_text_schema(),
        kind=SeedKind.MCP,
        server="text_service",
        remote="upper",
    ),
    CapabilitySeed(
        name="word_count",
        description="Count the words of a text.",
        input_schema=_text_schema(),
        kind=SeedKind.CUSTOM,
        behavior="word_count",
    ),
    CapabilitySeed(
        name="char_count",
        description="Count the characters of a text.",
        input_schema=_text_schema(),
        kind=SeedKind.CUSTOM,
        behavior="char_count",
    ),
    CapabilitySeed(
        name="shout",
        description="Return a text in upper case.",
        input_schema=_text_schema(),
        kind=SeedKind.CUSTOM,
        behavior="uppercase",
    ),
    CapabilitySeed(
        name="sum_numbers",
        description="Sum a list of numbers.",
        input_schema={
            "type": "object",
            "properties": {"numbers": {"type": "array", "items": {"type": "number"}}},
            "required": ["numbers"],
        },
        kind=SeedKind.CUSTOM,
        behavior="sum",
    ),
    CapabilitySeed(
        name="make_report",
        description="Format a short report from a title and a body.",
        input_schema={
            "type": "object",
            "properties": {"title": {"type": "string"}, "body": {"type": "string"}},
            "required": ["title", "body"],
        },
        kind=SeedKind.CUSTOM,
        behavior="template",
    ),
]

PATTERN_ORDER = [
    WorkflowPattern.SINGLE_REACT,
    WorkflowPattern.PIPELINE,
    WorkflowPattern.MANAGER_WORKERS,
    WorkflowPattern.HIERARCHICAL_TREE,
    WorkflowPattern.FIXED_WORKFLOW,
]

DOMAINS = [
    "answers math questions",
    "writes market research reports",
    "triages customer support tickets",
    "reviews pull requests",
    "plans team offsites",
    "cleans and summarizes sales data",
    "translates product documentation",
    "prepares weekly finance digests",
    "maintains a small knowledge base",
    "drafts blog posts from release notes",
]

PHRASES = {
    WorkflowPattern.PIPELINE: "Build a pipeline of {nodes} agents where each stage hands its output to the next; it {domain}.",
    WorkflowPattern.MANAGER_WORKERS: "Build a team of {nodes} agents, a manager delegating to workers; the team {domain}.",
    WorkflowPattern.HIERARCHICAL_TREE: (
        "Build a hierarchical organisation of {nodes} agents, {depth} layers deep, that {domain}."
    ),
    WorkflowPattern.FIXED_WORKFLOW: "Build a fixed workflow of {nodes} agents that always runs the same steps and {domain}.",
}

# Node targets cycle through 2..34 for the multi-agent patterns
MULTI_NODE_SPAN = 33


def seed_descriptions(n: int, seed: int = 0) -> List[FrameworkDescription]:
    """
    A deterministic corpus of framework-construction queries built from the capability seeds.  The
    patterns are used in turn, the multi-agent ones spread their node targets over 2..34, the single
    agent pattern covers the one node frameworks.
    """
    rng = np.random.default_rng(derive_seed(seed, "seed_descriptions"))
    offset = int(rng.integers(MULTI_NODE_SPAN))
    descriptions: List[FrameworkDescription] = []
    multi = 0
    for i in range(n):
        pattern = PATTERN_ORDER[i % len(PATTERN_ORDER)]
        domain = DOMAINS[int(rng.integers(len(DOMAINS)))]
        picked = rng.choice(len(CAPABILITY_SEEDS), size=int(rng.integers(2, 6)), replace=False)
        seeds = [CAPABILITY_SEEDS[int(j)] for j in sorted(picked)]

        if pattern == WorkflowPattern.SINGLE_REACT:
            text = f"Build a single assistant that {domain}."
            constraints = Constraints(target_nodes=1, target_depth=1)
        else:
            nodes = 2 + (multi * 7 + offset) % MULTI_NODE_SPAN
            multi += 1
            depth = min(nodes, 3) if pattern == WorkflowPattern.HIERARCHICAL_TREE else 2
            text = PHRASES[pattern].format(nodes=nodes, depth=depth, domain=domain)
            constraints = Constraints(target_nodes=nodes, target_depth=depth)

        descriptions.append(FrameworkDescription(text=text, capability_seeds=seeds, constraints=constraints))

    return descriptions
