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
import threading
from typing import Dict

import numpy as np
import pytest
from scipy import stats

from agentscale.exceptions import ConfigSyntaxError, ExpansionRejected, SchemaError
from agentscale.queries.models import FrameworkContext
from agentscale.queries.taxonomy import (
    ProblemTypeTree,
    dump_tree,
    expand_taxonomy,
    leaf_probabilities,
    load_tree,
    normalize_label,
    parse_tree,
    sample_problem_type,
)
from agentscale.synthesis.backend import ScriptedBackend, TemplateBackend


def flat_tree(counts: Dict[str, int]) -> ProblemTypeTree:
    leaves = "\n".join(
        f"    - {{id: {name}, labels: {{en: {name.title()}, zh: {name}}}, count: {count}}}" for name, count in counts.items()
    )
    return parse_tree(f"nexau_taxonomy: 1\nroot:\n  id: all\n  labels: {{en: All, zh: 全部}}\n  children:\n{leaves}\n")


def test_default_tree() -> None:
    tree = load_tree()
    assert tree.root.id == "all"
    assert "coding.bug_fix" in tree
    assert tree.parent("coding.bug_fix") == "coding"
    assert tree.node("coding.bug_fix").labels.zh == "缺陷修复"
    assert tree.total_count == 0
    assert all(leaf.is_leaf for leaf in tree.leaves())

    reloaded = parse_tree(dump_tree(tree))
    assert [n.id for n in reloaded.iter_nodes()] == [n.id for n in tree.iter_nodes()]


@pytest.mark.parametrize(
    "document, error",
    [
        ("root: [", ConfigSyntaxError),
        ("nexau_taxonomy: 3\nroot: {id: all, labels: {en: All, zh: 全部}}", SchemaError),
        ("root: {id: all, labels: {en: All, zh: 全部}}\nextra: 1", SchemaError),
        ("root: {id: all, labels: {en: All}}", SchemaError),
        ("root: {id: all, labels: {en: All, zh: 全部}, count: -1}", SchemaError),
        (
            "root: {id: all, labels: {en: All, zh: 全部}, children: [{id: all, labels: {en: Again, zh: 再次}}]}",
            SchemaError,
        ),
    ],
)
def test_invalid_trees(document: str, error: type) -> None:
    with pytest.raises(error):
        parse_tree(document)


def test_inverse_frequency_weights() -> None:
    tree = flat_tree({"rare": 3, "common": 1})
    assert leaf_probabilities(tree) == pytest.approx({"rare": 1 / 3, "common": 2 / 3})

    rng = np.random.default_rng(11)
    draws = [sample_problem_type(tree, rng, record=False) for _ in range(100_000)]
    assert draws.count("rare") / len(draws) == pytest.approx(1 / 3, abs=0.01)
    assert draws.count("common") / len(draws) == pytest.approx(2 / 3, abs=0.01)
    assert tree.total_count == 4


def test_uniform_when_counts_are_equal() -> None:
    tree = flat_tree({name: 2 for name in ("a", "b", "c", "d", "e")})
    rng = np.random.default_rng(5)
    draws = [sample_problem_type(tree, rng, record=False) for _ in range(20_000)]
    observed = [draws.count(name) for name in ("a", "b", "c", "d", "e")]
    assert stats.chisquare(observed).pvalue > 0.001


def test_recorded_draws_balance_the_counts() -> None:
    tree = flat_tree({name: 0 for name in ("a", "b", "c", "d", "e")})
    rng = np.random.default_rng(3)
    for _ in range(1000):
        sample_problem_type(tree, rng)
    counts = [leaf.count for leaf in tree.leaves()]
    assert sum(counts) == 1000
    assert max(counts) - min(counts) <= 40


def test_concurrent_draws_keep_every_count() -> None:
    tree = load_tree()

    def draw(seed: int) -> None:
        rng = np.random.default_rng(seed)
        for _ in range(500):
            sample_problem_type(tree, rng)

    threads = [threading.Thread(target=draw, args=(seed,)) for seed in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert tree.total_count == 4000
    assert sum(leaf.count for leaf in tree.leaves()) == 4000


def test_expand_category() -> None:
    tree = load_tree()
    leaves = len(tree.leaves())
    added = expand_taxonomy(tree, "data", TemplateBackend())
    assert added == ["data.anomaly_detection", "data.forecasting", "data.survey_analysis"]
    assert tree.node("data.forecasting").labels.zh == "时间序列预测"
    assert tree.parent("data.forecasting") == "data"
    assert len(tree.leaves()) == leaves + 3

    # Same proposals again, all duplicates
    assert expand_taxonomy(tree, "data", TemplateBackend()) == []


def test_expand_leaf_with_capabilities() -> None:
    tree = load_tree()
    context = FrameworkContext(name="helper", capabilities=["fs_write", "word_count"])
    added = expand_taxonomy(tree, "data.cleaning", TemplateBackend(), context)
    assert added == ["data.cleaning.with_fs_write", "data.cleaning.with_word_count"]
    assert not tree.node("data.cleaning").is_leaf
    assert tree.node("data.cleaning.with_fs_write").labels.en == "Data cleaning with fs_write"

    assert expand_taxonomy(tree, "data.cleaning.with_fs_write", TemplateBackend()) == [
        "data.cleaning.with_fs_write.introductory",
        "data.cleaning.with_fs_write.advanced",
    ]


def test_expand_under_the_root_uses_bare_slugs() -> None:
    tree = load_tree()
    proposal = {"children": [{"slug": "legal", "en": "Legal questions", "zh": "法律问题"}]}
    assert expand_taxonomy(tree, "all", ScriptedBackend([json.dumps(proposal)])) == ["legal"]
    assert tree.parent("legal") == "all"


def test_expansion_drops_label_duplicates() -> None:
    tree = load_tree()
    proposal = {
        "children": [
            {"slug": "cleanup", "en": "data  CLEANING!", "zh": "清洗"},
            {"slug": "dashboards", "en": "Dashboards", "zh": "数据清洗"},
            {"slug": "pivot_tables", "en": "Pivot tables", "zh": "数据透视表"},
            {"slug": "pivots", "en": "Pivot Tables", "zh": "透视"},
        ]
    }
    assert expand_taxonomy(tree, "data", ScriptedBackend([json.dumps(proposal)])) == ["data.pivot_tables"]
    assert normalize_label("data  CLEANING!") == normalize_label("Data cleaning")


@pytest.mark.parametrize(
    "raw",
    [
        "not json",
        json.dumps({"nodes": []}),
        json.dumps({"children": [{"slug": "Bad Slug", "en": "Bad", "zh": "坏"}]}),
        json.dumps({"children": [{"slug": "blank", "en": " ", "zh": "空"}]}),
    ],
)
def test_rejected_expansions(raw: str) -> None:
    tree = load_tree()
    before = dump_tree(tree)
    with pytest.raises(ExpansionRejected):
        expand_taxonomy(tree, "data", ScriptedBackend([raw]))
    assert dump_tree(tree) == before


def test_expand_unknown_node() -> None:
    with pytest.raises(ExpansionRejected):
        expand_taxonomy(load_tree(), "astrology", TemplateBackend())


def test_expansion_prompt_lists_siblings_and_capabilities() -> None:
    backend = ScriptedBackend([json.dumps({"children": []})])
    expand_taxonomy(load_tree(), "data", backend, FrameworkContext(name="x", capabilities=["echo"]))
    payload = backend.requests[0].payload
    assert payload["siblings"] == ["Data cleaning", "Metrics reporting", "Chart design"]
    assert payload["capabilities"] == ["echo"]
    assert backend.requests[0].prompt.startswith("Propose new problem types")
