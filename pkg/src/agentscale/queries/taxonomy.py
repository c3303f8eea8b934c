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
import threading
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from agentscale.data import PROBLEM_TYPES
from agentscale.exceptions import ExpansionRejected, SchemaError
from agentscale.helpers.utils import load_document
from agentscale.queries.models import FrameworkContext, Labels
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, template

LOGGER = logging.getLogger(__name__)

HEADER_KEY = "nexau_taxonomy"
TAXONOMY_VERSION = 1

SLUG_RE = re.compile(r"^[a-z][a-z0-9_]*$")

EXPAND_PROMPT = """\
Propose new problem types to add below the given parent in a taxonomy of user requests.  They must be
narrower than the parent and doable with the listed capabilities.  Answer with a json object
{"children": [{"slug": <lowercase identifier>, "en": <english label>, "zh": <chinese label>}]}.
"""


class TreeNode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    labels: Labels
    count: int = Field(default=0, ge=0)
    children: List["TreeNode"] = Field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


TreeNode.model_rebuild()


class ProblemTypeTree:
    """
    The hierarchical taxonomy problem types are drawn from.  Every mutation, sampling included, goes through
    the tree lock so that concurrent samplers see consistent counts.
    """

    def __init__(self, root: TreeNode) -> None:
        self.root = root
        self.lock = threading.RLock()
        self._nodes: Dict[str, TreeNode] = {}
        self._parents: Dict[str, Optional[str]] = {}
        self._index(root, None)

    def _index(self, node: TreeNode, parent: Optional[str]) -> None:
        if node.id in self._nodes:
            raise SchemaError(f"Problem type id {node.id!r} is used twice", path=node.id)
        self._nodes[node.id] = node
        self._parents[node.id] = parent
        for child in node.children:
            self._index(child, node.id)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, node_id: str) -> TreeNode:
        return self._nodes[node_id]

    def parent(self, node_id: str) -> Optional[str]:
        return self._parents[node_id]

    def iter_nodes(self) -> Iterator[TreeNode]:
        def walk(node: TreeNode) -> Iterator[TreeNode]:
            yield node
            for child in node.children:
                yield from walk(child)

        return walk(self.root)

    def leaves(self) -> List[TreeNode]:
        return [node for node in self.iter_nodes() if node.is_leaf]

    @property
    def total_count(self) -> int:
        return sum(node.count for node in self.iter_nodes())

    def attach(self, parent_id: str, node: TreeNode) -> None:
        with self.lock:
            self._index(node, parent_id)
            self._nodes[parent_id].children.append(node)


def parse_tree(document: str) -> ProblemTypeTree:
    """
    Parse a problem type tree document.

    :raises ConfigSyntaxError: The document is not valid yaml
    :raises SchemaError: The document doesn't describe a valid tree
    """
    data = load_document(document, HEADER_KEY, TAXONOMY_VERSION, "taxonomy")
    if set(data) != {"root"}:
        raise SchemaError(f"A taxonomy document holds a single root key, got {sorted(data)}")

    try:
        root = TreeNode.model_validate(data["root"])
    except ValidationError as e:
        raise SchemaError(f"Invalid problem type tree: {e}", path="root")

    return ProblemTypeTree(root)


def load_tree(path: Optional[Path] = None) -> ProblemTypeTree:
    """
    Load a tree from a file, the bundled default tree if no path is given.
    """
    return parse_tree((path or PROBLEM_TYPES).read_text(encoding="utf-8"))


def dump_tree(tree: ProblemTypeTree) -> str:
    with tree.lock:
        data = {HEADER_KEY: TAXONOMY_VERSION, "root": tree.root.model_dump(mode="json")}
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)


def leaf_weights(tree: ProblemTypeTree) -> Tuple[List[str], np.ndarray]:
    leaves = tree.leaves()
    counts = np.array([leaf.count for leaf in leaves], dtype=float)
    return [leaf.id for leaf in leaves], 1.0 / (1.0 + counts)


def leaf_probabilities(tree: ProblemTypeTree) -> Dict[str, float]:
    """
    The distribution the next draw follows: every leaf weighted by 1/(1+count), normalized.
    """
    with tree.lock:
        ids, weights = leaf_weights(tree)
    probabilities = weights / weights.sum()
    return {node_id: float(p) for node_id, p in zip(ids, probabilities)}


def sample_problem_type(tree: ProblemTypeTree, rng: Union[np.random.Generator, int], *, record: bool = True) -> str:
    """
    Draw a leaf with inverse-frequency weighting, under-represented problem types come out more often.

    :param tree: The tree to draw from, its counters are updated
    :param rng: A numpy generator, or a seed to build one from
    :param record: Whether to count the draw.  Without it the distribution stays fixed.
    """
    generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    with tree.lock:
        ids, weights = leaf_weights(tree)
        cumulative = np.cumsum(weights)
        index = int(np.searchsorted(cumulative, generator.random() * cumulative[-1], side="right"))
        chosen = tree.node(ids[min(index, len(ids) - 1)])
        if record:
            chosen.count += 1
    return chosen.id


def normalize_label(label: str) -> str:
    return " ".join(re.sub(r"[^\w\s]", " ", label.casefold()).split())


class ProposedNode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    slug: str
    en: str
    zh: str


class Proposal(BaseModel):
    model_config = ConfigDict(extra="forbid")

    children: List[ProposedNode]


# Narrower problem types for the categories of the default tree, keyed by the english parent label
EXPANSIONS: Dict[str, List[Tuple[str, str, str]]] = {
    "data analysis": [
        ("anomaly_detection", "Anomaly detection", "异常检测"),
        ("forecasting", "Time series forecasting", "时间序列预测"),
        ("survey_analysis", "Survey analysis", "问卷分析"),
    ],
    "software development": [
        ("testing", "Test writing", "测试编写"),
        ("migration", "Dependency migration", "依赖迁移"),
    ],
    "research": [
        ("patent_search", "Patent search", "专利检索"),
        ("competitor_analysis", "Competitor analysis", "竞品分析"),
    ],
    "writing": [
        ("proofreading", "Proofreading", "校对"),
        ("meeting_notes", "Meeting notes", "会议纪要"),
    ],
    "planning": [
        ("event", "Event planning", "活动策划"),
        ("budget", "Budget planning", "预算规划"),
    ],
    "mathematics": [
        ("geometry", "Geometry problems", "几何问题"),
        ("probability", "Probability puzzles", "概率谜题"),
    ],
}


@template("expand_taxonomy")
def expand_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    parent = request.payload["parent"]
    known = EXPANSIONS.get(normalize_label(parent["en"]))
    if known is not None:
        children = [{"slug": slug, "en": en, "zh": zh} for slug, en, zh in known]
    else:
        # Unknown category, derive narrower types from what the framework can do
        capabilities = request.payload.get("capabilities") or []
        children = [
            {
                "slug": "with_" + re.sub(r"[^a-z0-9_]", "_", c.lower()),
                "en": f"{parent['en']} with {c}",
                "zh": f"{parent['zh']}（{c}）",
            }
            for c in capabilities[:3]
        ]
        if not children:
            children = [
                {"slug": "introductory", "en": f"Introductory {parent['en'].lower()}", "zh": f"入门{parent['zh']}"},
                {"slug": "advanced", "en": f"Advanced {parent['en'].lower()}", "zh": f"高级{parent['zh']}"},
            ]
    return json.dumps({"children": children}, ensure_ascii=False)


def parse_proposal(raw: str) -> Proposal:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ExpansionRejected(f"The expansion is not valid json: {e}")

    try:
        proposal = Proposal.model_validate(data)
    except ValidationError as e:
        raise ExpansionRejected(f"The expansion doesn't match the node schema: {e}")

    for child in proposal.children:
        if not SLUG_RE.match(child.slug):
            raise ExpansionRejected(f"Invalid slug {child.slug!r}, it should match {SLUG_RE.pattern}")
        if not child.en.strip() or not child.zh.strip():
            raise ExpansionRejected(f"Proposed node {child.slug} misses one of its labels")

    return proposal


def expand_taxonomy(
    tree: ProblemTypeTree,
    parent_id: str,
    gen: GeneratorBackend,
    framework_context: Optional[FrameworkContext] = None,
    *,
    seed: int = 0,
) -> List[str]:
    """
    Grow the tree below a node with problem types proposed by the generator.  Proposals whose label
    duplicates a sibling are dropped.  Expanding a leaf turns it into a category.

    :return: The ids of the nodes that were added
    :raises ExpansionRejected: The parent is unknown, or the generator output is not a valid proposal
    """
    if parent_id not in tree:
        raise ExpansionRejected(f"Can not expand unknown problem type {parent_id!r}")

    parent = tree.node(parent_id)
    payload: Dict[str, Any] = {
        "parent": parent.labels.model_dump(),
        "siblings": [child.labels.en for child in parent.children],
        "capabilities": framework_context.capabilities if framework_context is not None else [],
    }
    request = GenerationRequest(task="expand_taxonomy", prompt=EXPAND_PROMPT, payload=payload, seed=seed)
    proposal = parse_proposal(gen.generate(request))

    added: List[str] = []
    with tree.lock:
        seen = {normalize_label(child.labels.en) for child in parent.children}
        seen.update(normalize_label(child.labels.zh) for child in parent.children)
        for proposed in proposal.children:
            node_id = proposed.slug if tree.parent(parent_id) is None else f"{parent_id}.{proposed.slug}"
            keys = {normalize_label(proposed.en), normalize_label(proposed.zh)}
            if keys & seen or node_id in tree:
                LOGGER.debug(f"Dropping proposed problem type {proposed.en!r}, it duplicates an existing one")
                continue

            tree.attach(parent_id, TreeNode(id=node_id, labels=Labels(en=proposed.en, zh=proposed.zh)))
            seen.update(keys)
            added.append(node_id)

    LOGGER.info(f"Expanded {parent_id} with {len(added)} problem type(s): {added}")
    return added
