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

import ast
import json
import logging
import string
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from agentscale.capabilities.scripts import ScriptRunner
from agentscale.config.parser import IDENTIFIER
from agentscale.config.schema import ToolKind, ToolRef
from agentscale.exceptions import InvalidToolSpec, StubGenerationFailed
from agentscale.helpers.schema import example_arguments, schema_problems
from agentscale.synthesis.backend import GenerationRequest, GeneratorBackend, template

LOGGER = logging.getLogger(__name__)

MAX_ATTEMPTS = 3
TOOLS_DIR = "tools"

STUB_PROMPT = """Write a python script implementing the described tool.  It reads its arguments as a json object on stdin,
validates them against the input schema with jsonschema, prints the observation on stdout and exits with code 2 and a
json error on invalid input."""

STUB_TEMPLATE = string.Template(
    '''#!/usr/bin/env python3
"""
Generated tool stub: $name

$description
"""

import json
import sys

import jsonschema

INPUT_SCHEMA = json.loads($schema)


def run(arguments):
$body


def main():
    try:
        arguments = json.loads(sys.stdin.read() or "{}")
        jsonschema.validate(arguments, INPUT_SCHEMA)
    except (ValueError, jsonschema.ValidationError) as e:
        print(json.dumps({"error": "invalid_input", "message": str(e).splitlines()[0]}))
        return 2
    print(run(arguments))
    return 0


if __name__ == "__main__":
    sys.exit(main())
'''
)

BEHAVIORS: Dict[str, str] = {
    "word_count": "    return len(str(arguments.get($field, \"\")).split())",
    "char_count": "    return len(str(arguments.get($field, \"\")))",
    "uppercase": "    return str(arguments.get($field, \"\")).upper()",
    "sum": """    total = 0
    for value in arguments.values():
        values = value if isinstance(value, list) else [value]
        total += sum(v for v in values if isinstance(v, (int, float)) and not isinstance(v, bool))
    return int(total) if float(total).is_integer() else total""",
    "echo": "    return json.dumps(arguments, sort_keys=True, ensure_ascii=False)",
    "template": "    return $label + \": \" + \", \".join(f\"{k}={arguments[k]}\" for k in sorted(arguments))",
}


class CustomToolSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    description: str
    input_schema: Dict[str, Any] = Field(default_factory=dict)
    behavior: str = "template"

    @property
    def path(self) -> str:
        return f"{TOOLS_DIR}/{self.name}.py"


def text_field(schema: Dict[str, Any]) -> Optional[str]:
    """
    The parameter the text behaviours work on: the first required string, else the first string.
    """
    properties = schema.get("properties", {})
    strings = [name for name, prop in properties.items() if isinstance(prop, dict) and prop.get("type") == "string"]
    required = [name for name in schema.get("required", []) if name in strings]
    return (required or strings or [None])[0]


@template("tool_stub")
def stub_template(request: GenerationRequest, rng: np.random.Generator) -> str:
    spec = CustomToolSpec.model_validate(request.payload)
    body = string.Template(BEHAVIORS[spec.behavior]).substitute(
        field=repr(text_field(spec.input_schema) or "text"),
        label=repr(spec.name),
    )
    return STUB_TEMPLATE.substitute(
        name=spec.name,
        description=spec.description,
        schema=repr(json.dumps(spec.input_schema or {"type": "object"}, sort_keys=True)),
        body=body,
    )


def smoke_test(source: str, spec: CustomToolSpec, timeout: float = 30) -> Optional[str]:
    """
    Run a stub once with example arguments.

    :return: What went wrong, or None if the stub answered
    """
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / f"{spec.name}.py"
        path.write_text(source, encoding="utf-8")
        observation = ScriptRunner(path, timeout).run(example_arguments(spec.input_schema))
    return observation.content if observation.is_error else None


def jsonschema_calls(tree: ast.AST) -> int:
    """
    Count the calls going through a name the module imported from jsonschema.
    """
    names: Set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.name.split(".")[0] == "jsonschema":
                    names.add(alias.asname or "jsonschema")
        elif isinstance(node, ast.ImportFrom) and (node.module or "").split(".")[0] == "jsonschema":
            names.update(alias.asname or alias.name for alias in node.names)

    calls = 0
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            func = node.func
            while isinstance(func, ast.Attribute):
                func = func.value
            if isinstance(func, ast.Name) and func.id in names:
                calls += 1
    return calls


def stub_problems(source: str, spec: CustomToolSpec, *, smoke: bool = True) -> List[str]:
    try:
        tree = ast.parse(source, spec.path)
        compile(tree, spec.path, "exec")
    except SyntaxError as e:
        return [f"the stub does not compile: {e.msg} (line {e.lineno})"]

    problems: List[str] = []
    if not jsonschema_calls(tree):
        problems.append("the stub does not validate its input with jsonschema")
    if smoke and not problems:
        failure = smoke_test(source, spec)
        if failure is not None:
            problems.append(f"the stub failed its smoke invocation: {failure}")
    return problems


def _strip_fences(raw: str) -> str:
    text = raw.strip()
    if text.startswith("```"):
        text = text.partition("\n")[2]
        text = text.rsplit("```", 1)[0]
    return text.strip() + "\n"


def synthesize_custom_tool(
    spec: CustomToolSpec,
    gen: GeneratorBackend,
    *,
    seed: int = 0,
    smoke: bool = True,
    max_attempts: int = MAX_ATTEMPTS,
) -> Tuple[ToolRef, str]:
    """
    Generate the script of a custom tool and the tool reference pointing to it, relative to the config.

    :raises InvalidToolSpec: If the spec itself is unusable, nothing is generated then
    :raises StubGenerationFailed: If no valid stub came out of max_attempts attempts
    """
    if not IDENTIFIER.match(spec.name):
        raise InvalidToolSpec(f"Tool name {spec.name!r} is not an identifier")
    if not spec.description.strip():
        raise InvalidToolSpec(f"Tool {spec.name} has no description")
    if spec.behavior not in BEHAVIORS:
        raise InvalidToolSpec(f"Unknown behavior {spec.behavior!r} for tool {spec.name}, expected one of {sorted(BEHAVIORS)}")
    problems = schema_problems(spec.input_schema)
    if problems:
        raise InvalidToolSpec(f"Invalid input schema for tool {spec.name}: {problems}")

    for attempt in range(max_attempts):
        raw = gen.generate(
            GenerationRequest(
                task="tool_stub",
                prompt=STUB_PROMPT,
                payload=spec.model_dump(mode="json"),
                seed=seed,
                attempt=attempt,
                feedback=problems,
            )
        )
        source = _strip_fences(raw)
        problems = stub_problems(source, spec, smoke=smoke)
        if not problems:
            ref = ToolRef(
                name=spec.name,
                kind=ToolKind.CUSTOM_SCRIPT,
                description=spec.description,
                input_schema=spec.input_schema,
                source=spec.path,
            )
            return ref, source

        LOGGER.warning(f"Stub attempt {attempt + 1}/{max_attempts} for {spec.name} rejected: {problems}")

    raise StubGenerationFailed(f"No valid stub for tool {spec.name} after {max_attempts} attempts: {problems}")
