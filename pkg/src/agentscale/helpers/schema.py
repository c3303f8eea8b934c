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

from typing import Any, Dict, List

import jsonschema  # type: ignore
from jsonschema import Draft7Validator

JSON_TYPES = ("string", "number", "integer", "boolean", "array", "object", "null")


def schema_problems(schema: Dict[str, Any]) -> List[str]:
    """
    Check that a tool input schema is usable: it must be a valid draft 7 schema describing an object,
    and every required parameter must be declared with a type.

    :param schema: The schema to check
    :return: A list of human readable problems, empty if the schema is fine
    """
    problems: List[str] = []
    if not isinstance(schema, dict):
        return ["input_schema must be a mapping"]

    if not schema:
        # An empty schema accepts anything, that's a tool without parameters
        return problems

    try:
        Draft7Validator.check_schema(schema)
    except jsonschema.SchemaError as e:
        problems.append(f"invalid json schema: {e.message}")
        return problems

    if schema.get("type", "object") != "object":
        problems.append("input_schema must describe an object")

    properties = schema.get("properties", {})
    for name in schema.get("required", []):
        if name not in properties:
            problems.append(f"required parameter {name!r} is not declared in properties")
            continue

        declared_type = properties[name].get("type") if isinstance(properties[name], dict) else None
        if declared_type is None:
            problems.append(f"required parameter {name!r} has no type")

    return problems


def argument_violations(schema: Dict[str, Any], arguments: Any) -> List[Dict[str, str]]:
    """
    Validate tool call arguments against the tool input schema.

    :return: One entry per violation, with the offending field and the validator message.  Missing required
        fields are reported under their own name, not under the parent object.
    """
    if not schema:
        return [] if isinstance(arguments, dict) else [{"field": "", "message": "arguments must be an object"}]

    violations: List[Dict[str, str]] = []
    validator = Draft7Validator(schema)
    for error in sorted(validator.iter_errors(arguments), key=lambda e: (list(e.path), e.message)):
        prefix = ".".join(str(p) for p in error.path)
        if error.validator == "required" and isinstance(error.instance, dict):
            for missing in error.validator_value:
                if missing not in error.instance:
                    field = f"{prefix}.{missing}" if prefix else missing
                    violations.append({"field": field, "message": f"{missing!r} is a required property"})
            continue

        violations.append({"field": prefix, "message": error.message})

    return violations


def example_value(schema: Dict[str, Any], name: str = "value") -> Any:
    """
    Build a deterministic example value matching a (simple) json schema.
    """
    if "enum" in schema and schema["enum"]:
        return schema["enum"][0]
    if "default" in schema:
        return schema["default"]

    kind = schema.get("type", "string")
    if isinstance(kind, list):
        kind = kind[0]

    if kind == "string":
        return f"example {name}"
    if kind == "integer":
        return 1
    if kind == "number":
        return 1.5
    if kind == "boolean":
        return True
    if kind == "array":
        return [example_value(schema.get("items", {"type": "string"}), name)]
    if kind == "object":
        return example_arguments(schema)
    return None


def example_arguments(schema: Dict[str, Any]) -> Dict[str, Any]:
    """
    Build example arguments for a tool: one value for every required parameter.
    """
    properties = schema.get("properties", {})
    return {name: example_value(properties.get(name, {}), name) for name in schema.get("required", [])}
