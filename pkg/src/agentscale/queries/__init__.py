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

from agentscale.queries.models import (
    Difficulty,
    FrameworkContext,
    Labels,
    PersonaProfile,
    QueryConditioning,
    StageRecord,
    SynthesizedQuery,
)
from agentscale.queries.personas import load_personas
from agentscale.queries.pipeline import parse_difficulty_mix, sample_conditionings, synthesize_batch, synthesize_query
from agentscale.queries.retrieval import FixtureRetriever, Passage, Retriever
from agentscale.queries.taxonomy import (
    ProblemTypeTree,
    TreeNode,
    dump_tree,
    expand_taxonomy,
    leaf_probabilities,
    load_tree,
    parse_tree,
    sample_problem_type,
)

__all__ = [
    "Difficulty",
    "FixtureRetriever",
    "FrameworkContext",
    "Labels",
    "Passage",
    "PersonaProfile",
    "ProblemTypeTree",
    "QueryConditioning",
    "Retriever",
    "StageRecord",
    "SynthesizedQuery",
    "TreeNode",
    "dump_tree",
    "expand_taxonomy",
    "leaf_probabilities",
    "load_personas",
    "load_tree",
    "parse_difficulty_mix",
    "parse_tree",
    "sample_conditionings",
    "sample_problem_type",
    "synthesize_batch",
    "synthesize_query",
]
