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
import re
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from agentscale.exceptions import StageFailure
from agentscale.helpers.utils import derive_seed, digest
from agentscale.queries.models import (
    Difficulty,
    FrameworkContext,
    PersonaProfile,
    QueryConditioning,
    StageRecord,
    SynthesizedQuery,
)
from agentscale.queries.retrieval import FixtureRetriever, Passage, Retriever
from agentscale.queries.taxonomy import ProblemTypeTree, sample_problem_type
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, template

LOGGER = logging.getLogger(__name__)

MAX_ATTEMPTS = 3

REWRITE = "rewrite"
SYNTHESIZE = "synthesize"
GROUND = "ground"
FUZZIFY = "fuzzify"

STAGE_PROMPTS = {
    REWRITE: "Describe the user and what they need, the persona must plausibly have this kind of problem.",
    SYNTHESIZE: "Write the request this user sends to the assistant.  Harder requests carry more constraints.",
    GROUND: "Add the background passages to the request, keep the request itself unchanged.",
    FUZZIFY: "Make the request sound like a real person typed it.  Keep every name, label and tool name verbatim.",
}

CONSTRAINT_COUNTS = {Difficulty.EASY: 0, Difficulty.MEDIUM: 1, Difficulty.HARD: 3}

GENERIC_CONSTRAINTS = [
    "Keep the answer under 200 words.",
    "Explain every step you take.",
    "Write the final result to a file named result.md.",
    "Double check every number before answering.",
    "Give me two alternatives and recommend one.",
]

OPENERS = ["hey, quick one.", "ok so", "hi!", "hello, hope you can help."]
CLOSERS = ["thanks!", "thx", "cheers", "appreciate it"]
CASUAL = [
    ("I am ", "I'm "),
    ("I need ", "i need "),
    ("Please ", "pls "),
    ("do not ", "don't "),
    ("Make sure to ", "make sure to "),
    ("You can ", "you can "),
]

Check = Callable[[str], List[str]]


def _sentence(text: str) -> str:
    text = text.strip()
    return text if text.endswith((".", "!", "?")) else text + "."


def _goal_clause(goal: str) -> str:
    return f"Make sure to {goal[0].lower()}{goal[1:]}." if goal else ""


@template("query_" + REWRITE)
def rewrite_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    persona = request.payload["persona"]
    problem = request.payload["problem"]
    background = _sentence(persona["background"])
    return f"{persona['name']}: {background} Needs help with {problem['en']}, in a {persona['tone']} tone."


@template("query_" + SYNTHESIZE)
def synthesize_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    persona = request.payload["persona"]
    problem = request.payload["problem"]
    capabilities: List[str] = request.payload.get("capabilities", [])

    # The capabilities only depend on the problem so that difficulty levels share the same base request
    picker = np.random.default_rng(derive_seed(request.seed, problem["id"]))
    picked = sorted(picker.choice(capabilities, size=min(2, len(capabilities)), replace=False).tolist()) if capabilities else []

    parts = [f"Hi, I'm {persona['name']}.", _sentence(persona["background"]), f"I need help with {problem['en']}."]
    if picked:
        parts.append(f"You can use {' and '.join(picked)} for this.")

    pool = [_goal_clause(goal) for goal in persona.get("goals", []) if goal] + GENERIC_CONSTRAINTS
    count = CONSTRAINT_COUNTS[Difficulty(request.payload["difficulty"])]
    if count:
        parts.extend(pool[i] for i in sorted(rng.choice(len(pool), size=count, replace=False).tolist()))

    return " ".join(parts)


@template("query_" + GROUND)
def ground_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    passages = request.payload["passages"]
    lines = [f"- {p['title']}: {p['text']}" for p in passages]
    return request.payload["query"] + "\n\nBackground I found:\n" + "\n".join(lines)


def _protect(text: str, entities: Sequence[str]) -> Tuple[str, Dict[str, str]]:
    slots: Dict[str, str] = {}
    for index, entity in enumerate(sorted(entities, key=len, reverse=True)):
        slot = f"\x00{index}\x00"
        if entity in text:
            text = text.replace(entity, slot)
            slots[slot] = entity
    return text, slots


@template("query_" + FUZZIFY)
def fuzzify_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    text, slots = _protect(request.payload["query"], request.payload["entities"])
    for formal, casual in CASUAL:
        if rng.random() < 0.8:
            text = text.replace(formal, casual)
    for slot, entity in slots.items():
        text = text.replace(slot, entity)

    return f"{OPENERS[int(rng.integers(len(OPENERS)))]} {text} {CLOSERS[int(rng.integers(len(CLOSERS)))]}"


def query_entities(cond: QueryConditioning, text: str) -> List[str]:
    """
    The names a rewrite of the query must keep: the persona, the problem type and the capabilities the
    query mentions.
    """
    entities = [cond.persona.name, cond.problem_labels.en]
    entities.extend(c for c in cond.framework_context.capabilities if re.search(rf"\b{re.escape(c)}\b", text))
    return entities


def _missing(text: str, expected: Sequence[str]) -> List[str]:
    return [f"{value!r} is missing" for value in expected if value not in text]


def run_stage(
    stage: str,
    gen: GeneratorBackend,
    payload: Dict[str, Any],
    check: Check,
    *,
    seed: int,
    max_attempts: int = MAX_ATTEMPTS,
) -> Tuple[str, StageRecord]:
    """
    Run one stage of the pipeline, its output is retried with feedback until it passes the check.

    :raises StageFailure: No valid output after max_attempts attempts
    """
    input_digest = digest(stage, payload, length=16)
    problems: List[str] = []
    for attempt in range(max_attempts):
        request = GenerationRequest(
            task=f"query_{stage}",
            prompt=STAGE_PROMPTS[stage],
            payload=payload,
            seed=seed,
            attempt=attempt,
            feedback=problems,
        )
        output = gen.generate(request).strip()
        problems = ["the output is empty"] if not output else check(output)
        if not problems:
            return output, StageRecord(stage=stage, input_digest=input_digest, output_digest=digest(output, length=16))

        LOGGER.warning(f"Stage {stage} attempt {attempt + 1}/{max_attempts} rejected: {problems}")

    raise StageFailure(stage, f"No valid output after {max_attempts} attempts: {problems}")


def synthesize_query(
    cond: QueryConditioning,
    gen: GeneratorBackend,
    *,
    ground: bool = False,
    fuzzify: bool = False,
    retriever: Optional[Retriever] = None,
    seed: int = 0,
    max_attempts: int = MAX_ATTEMPTS,
) -> SynthesizedQuery:
    """
    Turn a conditioning into a user query: the rewrite stage aligns the persona with the problem type, the
    synthesis stage writes a query of the requested difficulty, then grounding and fuzzification optionally
    enhance it.

    :raises StageFailure: A stage produced no valid output
    """
    persona = cond.persona.model_dump(mode="json")
    problem = {"id": cond.problem_type, **cond.problem_labels.model_dump()}
    trace: List[StageRecord] = []

    brief, record = run_stage(
        REWRITE,
        gen,
        {"persona": persona, "problem": problem, "framework": cond.framework_context.name},
        lambda out: _missing(out, [cond.persona.name, cond.problem_labels.en]),
        seed=seed,
        max_attempts=max_attempts,
    )
    trace.append(record)

    text, record = run_stage(
        SYNTHESIZE,
        gen,
        {
            "brief": brief,
            "persona": persona,
            "problem": problem,
            "difficulty": cond.difficulty.value,
            "capabilities": cond.framework_context.capabilities,
        },
        lambda out: _missing(out, [cond.persona.name, cond.problem_labels.en]),
        seed=seed,
        max_attempts=max_attempts,
    )
    trace.append(record)
    entities = query_entities(cond, text)

    passages: List[Passage] = []
    if ground:
        passages = (retriever or FixtureRetriever.from_file()).retrieve(text + " " + cond.problem_labels.en)
        if passages:
            query = text
            text, record = run_stage(
                GROUND,
                gen,
                {"query": query, "passages": [p.model_dump() for p in passages]},
                lambda out: _missing(out, entities + [p.title for p in passages]),
                seed=seed,
                max_attempts=max_attempts,
            )
            trace.append(record)
        else:
            LOGGER.debug(f"No passage matches the query for {cond.problem_type}, it stays ungrounded")

    if fuzzify:
        query = text
        text, record = run_stage(
            FUZZIFY,
            gen,
            {"query": query, "entities": entities},
            lambda out: (["the output is identical to the input"] if out == query else []) + _missing(out, entities),
            seed=seed,
            max_attempts=max_attempts,
        )
        trace.append(record)

    return SynthesizedQuery(
        text=text,
        conditioning=cond,
        stage_trace=trace,
        grounded=bool(passages),
        fuzzified=fuzzify,
        passages=[p.id for p in passages],
    )


def parse_difficulty_mix(text: str) -> Tuple[float, float, float]:
    """
    Parse an "easy:medium:hard" weight triple, like "1:1:1" or "2:1:0".
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"A difficulty mix has three weights separated by ':', got {text!r}")
    try:
        weights = tuple(float(p) for p in parts)
    except ValueError:
        raise ValueError(f"The weights of a difficulty mix must be numbers, got {text!r}")
    if min(weights) < 0 or sum(weights) <= 0:
        raise ValueError(f"The weights of a difficulty mix must be non-negative and not all zero, got {text!r}")
    return weights[0], weights[1], weights[2]


def sample_conditionings(
    tree: ProblemTypeTree,
    personas: Sequence[PersonaProfile],
    contexts: Sequence[FrameworkContext],
    n: int,
    *,
    difficulty_mix: Tuple[float, float, float] = (1.0, 1.0, 1.0),
    seed: int = 0,
) -> List[QueryConditioning]:
    """
    Draw n conditionings, one framework after the other.  Draws are sequential so that the tree counts,
    and with them the outcome, only depend on the seed.
    """
    if not personas or not contexts:
        raise ValueError("Sampling conditionings needs at least one persona and one framework")

    rng = np.random.default_rng(seed)
    mix = np.array(difficulty_mix, dtype=float)
    levels = list(Difficulty)
    result: List[QueryConditioning] = []
    for index in range(n):
        problem_type = sample_problem_type(tree, rng)
        result.append(
            QueryConditioning(
                persona=personas[int(rng.integers(len(personas)))],
                problem_type=problem_type,
                problem_labels=tree.node(problem_type).labels,
                framework_context=contexts[index % len(contexts)],
                difficulty=levels[int(rng.choice(len(levels), p=mix / mix.sum()))],
            )
        )
    return result


def synthesize_batch(
    conditionings: Sequence[QueryConditioning],
    gen: GeneratorBackend,
    *,
    parallelism: int = 1,
    seed: int = 0,
    **options: Any,
) -> List[Optional[SynthesizedQuery]]:
    """
    Run the pipeline over many conditionings on a worker pool.  A conditioning whose pipeline fails gets
    None, the others are not affected.  The seed of every query only depends on its position.
    """

    def work(item: Tuple[int, QueryConditioning]) -> Optional[SynthesizedQuery]:
        index, cond = item
        try:
            return synthesize_query(cond, gen, seed=derive_seed(seed, index), **options)
        except StageFailure as e:
            LOGGER.warning(f"Query {index} ({cond.problem_type}) failed at stage {e.stage}: {e}")
            return None

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        return list(pool.map(work, enumerate(conditionings)))
