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

from typing import TYPE_CHECKING, Any, Callable, Dict, NamedTuple, Optional, Tuple

from agentscale.capabilities.storage import SHARED_NAMESPACE
from agentscale.capabilities.tools import ExecutorKind, Observation, ToolDescriptor
from agentscale.exceptions import UnresolvedRef
from agentscale.helpers.utils import canonical_json

if TYPE_CHECKING:
    from agentscale.runtime.context import ExecutionContext

BuiltinFn = Callable[[Dict[str, Any], "ExecutionContext"], Observation]

JSON_TYPES = ["string", "number", "boolean", "object", "array", "null"]


class Builtin(NamedTuple):
    description: str
    input_schema: Dict[str, Any]
    fn: BuiltinFn


def _object(required: Tuple[str, ...], **properties: Dict[str, Any]) -> Dict[str, Any]:
    return {"type": "object", "properties": properties, "required": list(required)}


def root_run(ctx: "ExecutionContext") -> str:
    return ctx.run_id.split("/")[0]


def fs_namespace(ctx: "ExecutionContext") -> str:
    # All the contexts of a run see the same files
    return f"{root_run(ctx)}/fs"


def storage_location(ctx: "ExecutionContext", key: str) -> Tuple[str, str]:
    prefix = f"{SHARED_NAMESPACE}/"
    if key.startswith(prefix):
        return SHARED_NAMESPACE, key[len(prefix) :]
    return root_run(ctx), key


def echo(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    return Observation(content=str(arguments["msg"]))


def final_answer(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    return Observation(content=str(arguments["answer"]), data={"final_answer": str(arguments["answer"])})


def fs_write(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    path, content = str(arguments["path"]), str(arguments["content"])
    version = ctx.env.storage.put(fs_namespace(ctx), path, content)
    return Observation(content=f"Wrote {len(content)} characters to {path}", data={"path": path, "version": version})


def fs_read(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    path = str(arguments["path"])
    content = ctx.env.storage.get(fs_namespace(ctx), path)
    if content is None:
        return Observation.failure("not_found", path=path)
    return Observation(content=str(content), data={"path": path})


def fs_list(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    paths = ctx.env.storage.keys(fs_namespace(ctx), str(arguments.get("prefix", "")))
    return Observation(content="\n".join(paths), data={"paths": paths})


def storage_get(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    namespace, key = storage_location(ctx, str(arguments["key"]))
    entry = ctx.env.storage.get_versioned(namespace, key)
    if entry is None:
        return Observation(content="null", data={"key": arguments["key"], "version": 0})
    return Observation(content=canonical_json(entry.value), data={"key": arguments["key"], "version": entry.version})


def storage_put(arguments: Dict[str, Any], ctx: "ExecutionContext") -> Observation:
    namespace, key = storage_location(ctx, str(arguments["key"]))
    version = ctx.env.storage.put(namespace, key, arguments["value"])
    key = arguments["key"]
    return Observation(content=f"Stored {key} (version {version})", data={"key": key, "version": version})


BUILTINS: Dict[str, Builtin] = {
    "echo": Builtin("Return the given message unchanged.", _object(("msg",), msg={"type": "string"}), echo),
    "final_answer": Builtin(
        "Submit the final answer of the task.  Calling this ends your work.",
        _object(("answer",), answer={"type": "string"}),
        final_answer,
    ),
    "fs_write": Builtin(
        "Write a file of the shared workspace, replacing its content.",
        _object(("path", "content"), path={"type": "string"}, content={"type": "string"}),
        fs_write,
    ),
    "fs_read": Builtin("Read a file of the shared workspace.", _object(("path",), path={"type": "string"}), fs_read),
    "fs_list": Builtin(
        "List the files of the shared workspace, optionally only those starting with a prefix.",
        _object((), prefix={"type": "string"}),
        fs_list,
    ),
    "storage_get": Builtin(
        "Read a value of the run storage.  Keys starting with shared/ are shared across runs.",
        _object(("key",), key={"type": "string"}),
        storage_get,
    ),
    "storage_put": Builtin(
        "Store a value in the run storage.  Keys starting with shared/ are shared across runs.",
        _object(("key", "value"), key={"type": "string"}, value={"type": JSON_TYPES}),
        storage_put,
    ),
}


def builtin_descriptor(
    name: str, source: str = "", description: str = "", input_schema: Optional[Dict[str, Any]] = None
) -> ToolDescriptor:
    """
    Build the descriptor of a builtin tool, the declared description and schema win over the builtin ones.

    :raises UnresolvedRef: If there is no such builtin
    """
    builtin = BUILTINS.get(source or name)
    if builtin is None:
        raise UnresolvedRef(f"Unknown builtin tool {source or name!r}, expected one of {sorted(BUILTINS)}")
    return ToolDescriptor(
        name=name,
        description=description or builtin.description,
        input_schema=input_schema or builtin.input_schema,
        kind=ExecutorKind.BUILTIN,
        executor=builtin.fn,
    )
