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

import hashlib
import json
import logging
import sys
from typing import IO, Any, Dict, Optional

import colorlog  # type: ignore
import yaml

from agentscale.exceptions import ConfigSyntaxError, SchemaError

LOG_COLORS = {"DEBUG": "cyan", "INFO": "green", "WARNING": "yellow", "ERROR": "red", "CRITICAL": "red"}


def canonical_json(value: Any) -> str:
    """
    Serialize a json-compatible value in a stable way: sorted keys, no insignificant whitespace,
    non-ascii characters kept as is.
    """
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(*parts: Any, length: Optional[int] = None) -> str:
    """
    Sha256 hex digest of the given parts.  Strings are hashed as is, anything else is hashed through
    its canonical json form.  Parts are separated so that ("ab", "c") and ("a", "bc") differ.

    :param parts: The values to hash
    :param length: If set, truncate the digest to this many characters
    """
    h = hashlib.sha256()
    for part in parts:
        text = part if isinstance(part, str) else canonical_json(part)
        h.update(text.encode("utf-8"))
        h.update(b"\x1f")
    hexdigest = h.hexdigest()
    return hexdigest[:length] if length is not None else hexdigest


def derive_seed(seed: int, *scope: Any) -> int:
    """
    Derive an independent, deterministic 32 bit seed for a sub-task from a parent seed.
    """
    return int(digest(seed, *scope, length=8), 16)


def io_logger(stream: IO[str], logger_name: str) -> None:
    """
    Helper function to be called as a thread, used to log any lines coming from the given stream.
    The function will exit when the stream is closed.

    :param stream: The stream to log
    :param logger_name: The name to give to the logs
    """
    logger = logging.getLogger(logger_name)
    try:
        for line in stream:
            logger.debug(line.rstrip("\n"))
    except ValueError:
        # The stream got closed under our feet
        pass


def is_on_tty() -> bool:
    return hasattr(sys.stdout, "isatty") and sys.stdout.isatty()


def get_log_formatter(timed: bool) -> logging.Formatter:
    log_format = "%(asctime)s " if timed else ""
    if not is_on_tty():
        return logging.Formatter(fmt=log_format + "%(name)-25s%(levelname)-8s%(message)s")

    return colorlog.ColoredFormatter(
        log_format + "%(log_color)s%(name)-25s%(levelname)-8s%(reset)s %(message)s",
        datefmt=None,
        reset=True,
        log_colors=LOG_COLORS,
    )


def setup_logging(trace: bool, stream: Optional[IO[str]] = None) -> None:
    """
    Setup the logging for the current process, if trace is true the logging level is debug, else it is info.

    :param trace: Whether to have debug log level or not
    :param stream: Where to write the logs, stdout by default
    """
    stream_handler = logging.StreamHandler(stream=stream or sys.stdout)
    stream_handler.setFormatter(get_log_formatter(timed=True))
    stream_handler.setLevel(logging.DEBUG if trace else logging.INFO)

    logging.root.handlers = []
    logging.root.addHandler(stream_handler)
    logging.root.setLevel(0)


def load_document(document: str, header: str, version: int, kind: str) -> Dict[str, Any]:
    """
    Parse a versioned yaml document.  The version header is optional, when present it must match and it is
    removed from the returned mapping.

    :param document: The yaml text
    :param header: The key holding the version
    :param version: The only supported version
    :param kind: What the document is, for the error messages
    :raises ConfigSyntaxError: The document is not valid yaml
    :raises SchemaError: The document is not a mapping or has another version
    """
    try:
        data = yaml.safe_load(document)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigSyntaxError(
            str(getattr(e, "problem", None) or e),
            line=mark.line + 1 if mark is not None else None,
            column=mark.column + 1 if mark is not None else None,
        )

    if not isinstance(data, dict):
        raise SchemaError(f"A {kind} document must be a mapping")

    found = data.pop(header, version)
    if found != version:
        raise SchemaError(f"Unsupported {kind} version {found!r}, expected {version}", path=header)

    return data
