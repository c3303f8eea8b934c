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
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Sequence

import pydantic
import yaml

from agentscale.capabilities.scripts import script_descriptor
from agentscale.exceptions import SkillLoadError

if TYPE_CHECKING:
    from agentscale.runtime.context import ExecutionContext

LOGGER = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.yaml"
SKILL_HEADER = "## SKILL: "


class SkillTool(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")

    script: str
    description: str = ""
    input_schema: Dict[str, Any] = pydantic.Field(default_factory=dict)


class SkillManifest(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")

    name: str
    prompt: str = "prompt.md"
    examples: str = "examples"
    scripts: str = "scripts"
    tools: List[SkillTool] = pydantic.Field(default_factory=list)


@dataclass
class Skill:
    name: str
    prompt_fragment: str
    few_shot_examples: List[str]
    scripts: List[Path]
    manifest_path: Path
    tools: Dict[str, SkillTool] = field(default_factory=dict)

    def section(self) -> str:
        """
        The delimited block appended to the system prompt of the agents using this skill.
        """
        parts = [f"{SKILL_HEADER}{self.name}", self.prompt_fragment.strip()]
        for i, example in enumerate(self.few_shot_examples, start=1):
            parts.append(f"### Example {i}\n{example.strip()}")
        return "\n\n".join(parts)

    def tool_name(self, script: Path) -> str:
        return f"{self.name}__{script.stem}"


def _files(directory: Path) -> List[Path]:
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))


def load_skill(directory: Path) -> Skill:
    """
    Load a skill from its self-contained directory.

    :raises SkillLoadError: If the manifest is missing or invalid, or if the prompt is empty
    """
    manifest_path = directory / MANIFEST_FILE
    if not manifest_path.is_file():
        raise SkillLoadError(f"No {MANIFEST_FILE} in skill directory {directory}")

    try:
        raw = yaml.safe_load(manifest_path.read_text(encoding="utf-8"))
        manifest = SkillManifest.model_validate(raw)
    except (yaml.YAMLError, pydantic.ValidationError) as e:
        raise SkillLoadError(f"Invalid skill manifest {manifest_path}: {e}")

    prompt_path = directory / manifest.prompt
    prompt = prompt_path.read_text(encoding="utf-8") if prompt_path.is_file() else ""
    if not prompt.strip():
        raise SkillLoadError(f"Skill {manifest.name} has an empty or missing prompt ({prompt_path})")

    examples = [p.read_text(encoding="utf-8") for p in _files(directory / manifest.examples)]
    scripts = _files(directory / manifest.scripts)

    tools: Dict[str, SkillTool] = {}
    for tool in manifest.tools:
        if not any(script.name == tool.script for script in scripts):
            raise SkillLoadError(f"Skill {manifest.name} declares a tool for a missing script {tool.script!r}")
        tools[tool.script] = tool

    LOGGER.debug(f"Loaded skill {manifest.name}: {len(examples)} example(s), {len(scripts)} script(s)")
    return Skill(
        name=manifest.name,
        prompt_fragment=prompt,
        few_shot_examples=examples,
        scripts=scripts,
        manifest_path=manifest_path,
        tools=tools,
    )


def inject_skills(ctx: "ExecutionContext", skills: Sequence[Skill]) -> "ExecutionContext":
    """
    Extend the system message of a fresh context with the given skills, in order, and register their scripts
    as tools.  A skill already injected in this context is skipped.
    """
    if ctx.iteration != 0:
        raise RuntimeError(f"Skills can only be injected before the first step, context {ctx.run_id} is at {ctx.iteration}")

    for skill in skills:
        if skill.name in ctx.injected_skills:
            continue

        system = ctx.messages[0]
        ctx.messages[0] = system.model_copy(update={"content": f"{system.content.rstrip()}\n\n{skill.section()}"})

        for script in skill.scripts:
            declared = skill.tools.get(script.name)
            ctx.registry.add(
                script_descriptor(
                    skill.tool_name(script),
                    script,
                    declared.description if declared else f"Run the {script.stem} script of the {skill.name} skill.",
                    declared.input_schema if declared else {},
                    ctx.env.script_timeout,
                ),
                agent=ctx.agent.name,
            )

        ctx.injected_skills.append(skill.name)

    return ctx
