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
import logging
import os
import subprocess
import sys
import threading
from pathlib import Path
from typing import IO, Any, Dict, List, Optional

from agentscale.capabilities.tools import ExecutorKind, Observation, ToolDescriptor
from agentscale.helpers.utils import io_logger

LOGGER = logging.getLogger(__name__)

ENV_SCRIPT_TIMEOUT = "NEX_SCRIPT_TIMEOUT"
DEFAULT_SCRIPT_TIMEOUT = 30.0


def script_timeout_from_env() -> float:
    raw = os.environ.get(ENV_SCRIPT_TIMEOUT)
    if raw is None:
        return DEFAULT_SCRIPT_TIMEOUT

    try:
        timeout = float(raw)
    except ValueError:
        LOGGER.warning(f"Ignoring {ENV_SCRIPT_TIMEOUT}={raw!r}, it is not a number")
        return DEFAULT_SCRIPT_TIMEOUT

    LOGGER.warning(f"{ENV_SCRIPT_TIMEOUT} overrides the default script timeout ({DEFAULT_SCRIPT_TIMEOUT}s) with {timeout}s")
    return timeout


def _read_into(stream: IO[str], sink: List[str]) -> None:
    sink.append(stream.read())


def _write_into(stream: IO[str], payload: str) -> None:
    try:
        with stream:
            stream.write(payload)
    except OSError:
        # The script exited or was killed without reading all of its input, its exit code tells the rest
        pass


class ScriptRunner:
    """
    Run a custom-script tool in a subprocess.  The arguments of the call are written as json to the
    script stdin, whatever it prints on stdout is the observation.  Its stderr is logged.
    """

    def __init__(self, path: Path, timeout: float = DEFAULT_SCRIPT_TIMEOUT) -> None:
        """
        :param path: The script to run, python files are run with the current interpreter
        :param timeout: The wall clock limit of one invocation, in seconds
        """
        self.path = path.absolute()
        self.timeout = timeout

    @property
    def cmd(self) -> List[str]:
        if self.path.suffix == ".py":
            return [sys.executable, str(self.path)]
        return [str(self.path)]

    def run(self, arguments: Any) -> Observation:
        if not self.path.exists():
            return Observation.failure("script_not_found", script=str(self.path))

        LOGGER.debug(f"Running the following script: {self.cmd}")
        process = subprocess.Popen(
            self.cmd,
            cwd=str(self.path.parent),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            universal_newlines=True,
            encoding="utf-8",
        )

        stderr_thread = threading.Thread(
            target=io_logger,
            args=(process.stderr, f"{self.path.name}[{process.pid}]-stderr"),
            daemon=True,
        )
        stderr_thread.start()

        stdout: List[str] = []
        stdout_thread = threading.Thread(target=_read_into, args=(process.stdout, stdout), daemon=True)
        stdout_thread.start()

        # Stdin is fed from a thread, so that a script not reading it still times out
        payload = json.dumps(arguments, ensure_ascii=False)
        stdin_thread = threading.Thread(target=_write_into, args=(process.stdin, payload), daemon=True)
        stdin_thread.start()

        try:
            returncode = process.wait(timeout=self.timeout)
        except subprocess.TimeoutExpired:
            process.kill()
            process.wait(5)
            LOGGER.warning(f"Script {self.path} exceeded its timeout of {self.timeout}s")
            return Observation.failure("timeout", script=self.path.name, timeout=self.timeout)
        finally:
            threads = (stdin_thread, stdout_thread, stderr_thread)
            for thread in threads:
                thread.join(5)
            if any(thread.is_alive() for thread in threads):
                LOGGER.warning("Failed to join the io threads of the script")

        output = "".join(stdout).strip()
        if returncode != 0:
            return Observation.failure("script_failed", script=self.path.name, exit_code=returncode, output=output)
        return Observation(content=output)


def script_descriptor(
    name: str,
    path: Path,
    description: str,
    input_schema: Optional[Dict[str, Any]] = None,
    timeout: float = DEFAULT_SCRIPT_TIMEOUT,
) -> ToolDescriptor:
    runner = ScriptRunner(path, timeout)
    return ToolDescriptor(
        name=name,
        description=description or f"Run the {path.name} script.",
        input_schema=input_schema or {},
        kind=ExecutorKind.SCRIPT,
        executor=lambda arguments, ctx: runner.run(arguments),
    )
