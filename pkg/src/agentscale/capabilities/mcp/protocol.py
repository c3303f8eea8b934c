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
from typing import Any, Dict, Optional

from agentscale.exceptions import ProtocolError

JSONRPC_VERSION = "2.0"
PROTOCOL_VERSION = "2024-11-05"

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603


def request(request_id: int, method: str, params: Optional[Dict[str, Any]] = None) -> str:
    frame: Dict[str, Any] = {"jsonrpc": JSONRPC_VERSION, "id": request_id, "method": method}
    if params is not None:
        frame["params"] = params
    return json.dumps(frame, ensure_ascii=False)


def notification(method: str, params: Optional[Dict[str, Any]] = None) -> str:
    frame: Dict[str, Any] = {"jsonrpc": JSONRPC_VERSION, "method": method}
    if params is not None:
        frame["params"] = params
    return json.dumps(frame, ensure_ascii=False)


def result(request_id: Any, value: Any) -> Dict[str, Any]:
    return {"jsonrpc": JSONRPC_VERSION, "id": request_id, "result": value}


def error(request_id: Any, code: int, message: str, data: Any = None) -> Dict[str, Any]:
    body: Dict[str, Any] = {"code": code, "message": message}
    if data is not None:
        body["data"] = data
    return {"jsonrpc": JSONRPC_VERSION, "id": request_id, "error": body}


def parse_frame(text: str) -> Dict[str, Any]:
    """
    Parse one frame received from a server.

    :raises ProtocolError: If the frame is not a json-rpc 2.0 message
    """
    try:
        frame = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"Malformed frame ({e.msg}): {text[:200]!r}")

    if not isinstance(frame, dict) or frame.get("jsonrpc") != JSONRPC_VERSION:
        raise ProtocolError(f"Not a json-rpc 2.0 frame: {text[:200]!r}")

    if "id" in frame and "method" not in frame:
        if ("result" in frame) == ("error" in frame):
            raise ProtocolError(f"A response must carry exactly one of result and error: {text[:200]!r}")
        if "error" in frame and not isinstance(frame["error"], dict):
            raise ProtocolError(f"Malformed error object: {text[:200]!r}")

    return frame
