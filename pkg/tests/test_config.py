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
import string
import textwrap

import pytest
from conftest import SIMPLE_FRAMEWORK, TEAM_FRAMEWORK
from hypothesis import given, settings
from hypothesis import strategies as st

from agentscale.config import (
    AgentSpec,
    FrameworkConfig,
    TerminationMode,
    TerminationPolicy,
    ToolKind,
    ToolRef,
    framework_to_dict,
    parse_framework,
    serialize_framework,
    validate_framework,
)
from agentscale.exceptions import ConfigError, ConfigSyntaxError, CycleError, NameCollision, SchemaError


def agent(name: str, **fields: object) -> str:
    extra = "".join(f"\n  {key}: {value}" for key, value in fields.items())
    return f"name: {name}\nsystem_prompt: Prompt of {name}\nmodel: default{extra}"


def test_parse_simple(simple_framework: FrameworkConfig) -> None:
    assert simple_framework.name == "helper"
    assert simple_framework.node_count == 1
    assert simple_framework.depth == 1
    assert [tool.name for tool in simple_framework.root_agent.tools] == ["echo", "fs_write", "fs_read"]
    assert simple_framework.root_agent.termination.mode == TerminationMode.NO_TOOL_CALL


def test_parse_team_expands_references(team_framework: FrameworkConfig) -> None:
    paths = [path for path, _ in team_framework.iter_nodes()]
    assert paths == [("manager",), ("manager", "worker"), ("manager", "reviewer")]
    assert team_framework.node_count == 3
    assert team_framework.depth == 2
    assert [name for name, _ in team_framework.children(team_framework.root_agent)] == ["worker", "reviewer"]


def test_round_trip_keeps_references(team_framework: FrameworkConfig) -> None:
    document = serialize_framework(team_framework)
    assert "- worker" in document
    assert framework_to_dict(parse_framework(document)) == framework_to_dict(team_framework)


def test_syntax_error_has_location() -> None:
    with pytest.raises(ConfigSyntaxError) as e:
        parse_framework("name: helper\nroot_agent: [unclosed\n")
    assert e.value.line is not None
    assert e.value.column is not None


def test_not_a_mapping() -> None:
    with pytest.raises(SchemaError) as e:
        parse_framework("- just\n- a list\n")
    assert str(e.value) == "A framework document must be a mapping"


def test_unsupported_version() -> None:
    with pytest.raises(SchemaError) as e:
        parse_framework(SIMPLE_FRAMEWORK.replace("nexau_schema: 1", "nexau_schema: 2"))
    assert e.value.path == "nexau_schema"
    assert "Unsupported framework version 2" in str(e.value)


def test_unknown_key_strict_and_lenient(caplog: pytest.LogCaptureFixture) -> None:
    document = SIMPLE_FRAMEWORK.replace("  max_iterations: 5", "  max_iterations: 5\n  temperature: 0.3")
    with pytest.raises(SchemaError) as e:
        parse_framework(document)
    assert e.value.path == "root_agent.temperature"

    with caplog.at_level(logging.WARNING):
        framework = parse_framework(document, lenient=True)
    assert framework.root_agent.max_iterations == 5
    assert "root_agent.temperature" in caplog.text


def test_missing_required_field() -> None:
    with pytest.raises(SchemaError) as e:
        parse_framework("name: broken\nroot_agent:\n  name: a\n  model: default\n")
    assert e.value.path == "root_agent.system_prompt"
    assert e.value.findings


def test_cycle_is_rejected() -> None:
    document = textwrap.dedent(
        """
        name: loop
        root_agent:
          name: a
          system_prompt: first
          model: default
          sub_agents: [b]
        agents:
          - name: b
            system_prompt: second
            model: default
            sub_agents: [a]
        """
    )
    with pytest.raises(CycleError) as e:
        parse_framework(document)
    assert e.value.cycle == ["a", "b", "a"]


def test_self_delegating_tool_is_a_cycle() -> None:
    document = textwrap.dedent(
        """
        name: selfish
        root_agent:
          name: a
          system_prompt: first
          model: default
          tools:
            - name: again
              kind: sub-agent
              source: a
        """
    )
    with pytest.raises(CycleError):
        parse_framework(document)


def test_name_collision() -> None:
    document = textwrap.dedent(
        """
        name: clash
        root_agent:
          name: a
          system_prompt: first
          model: default
          tools:
            - name: echo
              kind: builtin
          sub_agents:
            - name: echo
              system_prompt: an agent named like a tool
              model: default
        """
    )
    with pytest.raises(NameCollision) as e:
        parse_framework(document)
    assert e.value.name == "echo"
    assert sorted(e.value.kinds) == ["builtin", "sub-agent"]


def test_final_answer_is_reserved_in_final_answer_mode() -> None:
    document = textwrap.dedent(
        """
        name: reserved
        root_agent:
          name: a
          system_prompt: first
          model: default
          termination:
            mode: final-answer-tool
          tools:
            - name: final_answer
              kind: custom-script
              source: tools/final.py
        """
    )
    with pytest.raises(NameCollision):
        parse_framework(document)


def test_unresolved_reference() -> None:
    document = textwrap.dedent(
        """
        name: dangling
        root_agent:
          name: a
          system_prompt: first
          model: default
          sub_agents: [ghost]
        """
    )
    with pytest.raises(SchemaError) as e:
        parse_framework(document)
    assert e.value.path == "root_agent.sub_agents[0]"
    assert [f.rule for f in e.value.findings] == ["ref_resolves"]


@pytest.mark.parametrize(
    "fragment, rule",
    [
        ("  max_iterations: 0", "max_iterations_positive"),
        (
            "  tools:\n    - name: lookup\n      kind: builtin\n      source: echo\n"
            "      input_schema: {type: object, required: [q]}",
            "input_schema_typed",
        ),
        (
            "  mcp_servers:\n    - {name: calc, endpoint: loopback}\n    - {name: calc, endpoint: loopback}",
            "mcp_name_unique",
        ),
        ("  mcp_servers:\n    - {name: calc, endpoint: '  '}", "mcp_endpoint_nonempty"),
    ],
)
def test_invariant_findings(fragment: str, rule: str) -> None:
    document = f"name: checked\nroot_agent:\n  name: a\n  system_prompt: first\n  model: default\n{fragment}\n"
    with pytest.raises(SchemaError) as e:
        parse_framework(document)
    assert rule in [f.rule for f in e.value.findings]


def test_validate_reports_without_raising() -> None:
    framework = FrameworkConfig(
        name="not valid",
        root_agent=AgentSpec(name="a", system_prompt="p", model="m", max_iterations=0, sub_agents=[{"ref": "missing"}]),
    )
    report = validate_framework(framework)
    assert not report.ok
    assert {f.rule for f in report.findings} == {"identifier", "max_iterations_positive", "ref_resolves"}


def test_deep_framework_only_warns(caplog: pytest.LogCaptureFixture) -> None:
    document = textwrap.dedent(
        """
        name: deep
        root_agent:
          name: l1
          system_prompt: p
          model: default
          sub_agents: [l2]
        agents:
          - {name: l2, system_prompt: p, model: default, sub_agents: [l3]}
          - {name: l3, system_prompt: p, model: default, sub_agents: [l4]}
          - {name: l4, system_prompt: p, model: default}
        """
    )
    with caplog.at_level(logging.WARNING):
        framework = parse_framework(document)
    assert framework.depth == 4
    assert "4 layers deep" in caplog.text


def test_delegation_schema_and_summary(team_framework: FrameworkConfig) -> None:
    worker = team_framework.definitions()["worker"]
    assert worker.delegation_schema["required"] == ["task"]
    assert worker.summary.startswith("Delegate a task to the worker agent.")


IDENTIFIERS = st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True).filter(lambda name: name not in ("echo", "final_answer"))
PROMPTS = st.text(alphabet=string.ascii_letters + string.digits + " .,:;!?-'\"#\n中文", min_size=1, max_size=60)


@st.composite
def frameworks(draw: st.DrawFn) -> FrameworkConfig:
    names = draw(st.lists(IDENTIFIERS, min_size=1, max_size=5, unique=True))

    def spec(name: str, children: list) -> AgentSpec:
        tools = [ToolRef(name="echo", kind=ToolKind.BUILTIN)] if draw(st.booleans()) else []
        return AgentSpec(
            name=name,
            system_prompt=draw(PROMPTS),
            model=draw(st.sampled_from(["default", "small", "large"])),
            tools=tools,
            sub_agents=children,
            max_iterations=draw(st.integers(1, 200)),
            termination=TerminationPolicy(mode=draw(st.sampled_from(list(TerminationMode)))),
        )

    # Every other agent is referenced by name, the others are written inline
    referenced = [spec(name, []) for name in names[1:] if names.index(name) % 2 == 0]
    inline = [spec(name, []) for name in names[1:] if names.index(name) % 2 == 1]
    children = inline + [{"ref": a.name} for a in referenced]
    return FrameworkConfig(name=draw(IDENTIFIERS), root_agent=spec(names[0], children), agents=referenced)


@settings(max_examples=100, deadline=None)
@given(frameworks())
def test_serialize_round_trip(framework: FrameworkConfig) -> None:
    assert validate_framework(framework).ok
    reparsed = parse_framework(serialize_framework(framework))
    assert framework_to_dict(reparsed) == framework_to_dict(framework)
    assert reparsed.node_count == framework.node_count


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=200))
def test_arbitrary_text_never_escapes_config_errors(document: str) -> None:
    try:
        parse_framework(document)
    except ConfigError:
        pass


def test_team_document_parses() -> None:
    assert parse_framework(TEAM_FRAMEWORK).name == "team"
