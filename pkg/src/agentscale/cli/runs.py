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
from pathlib import Path
from typing import Any, Dict, Optional

from agentscale.capabilities.storage import GlobalStorage
from agentscale.config.schema import FrameworkConfig
from agentscale.exceptions import GatewayError, MalformedResponse, ScriptExhausted, TransportError
from agentscale.gateway.base import ModelGateway
from agentscale.gateway.http import HttpGateway
from agentscale.gateway.policy import PolicyGateway
from agentscale.gateway.scripted import ScriptedGateway, load_script
from agentscale.runtime.engine import RunResult, derive_run_id, run_agent
from agentscale.trajectory.events import RunStatus, Trajectory, TrajectoryMetadata, read_events
from agentscale.trajectory.recorder import EVENTS_FILE, TrajectoryRecorder

LOGGER = logging.getLogger(__name__)

RESULT_FILE = "result.json"

BACKENDS = ("policy", "scripted", "live")

GATEWAY_ERROR_KINDS = {cls.__name__ for cls in (GatewayError, ScriptExhausted, TransportError, MalformedResponse)}

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_GATEWAY = 3


def make_gateway(backend: str, *, seed: int = 0, script: Optional[Path] = None) -> ModelGateway:
    """
    Build the model backend the command line asks for.
    """
    if backend == "policy":
        return PolicyGateway(seed)
    if backend == "scripted":
        if script is None:
            raise ValueError("The scripted backend needs a script file")
        return ScriptedGateway(load_script(script))
    if backend == "live":
        return HttpGateway.from_env()
    raise ValueError(f"Unknown backend {backend!r}, expected one of {list(BACKENDS)}")


def exit_code(result: RunResult) -> int:
    if result.status == RunStatus.COMPLETED:
        return EXIT_OK
    if result.error_kind in GATEWAY_ERROR_KINDS:
        return EXIT_GATEWAY
    return EXIT_RUNTIME


def execute_run(
    framework: FrameworkConfig,
    task: str,
    gateway: ModelGateway,
    runs_dir: Path,
    *,
    seed: int = 0,
    base_dir: Optional[Path] = None,
    storage: Optional[GlobalStorage] = None,
    dialect_hint: Optional[str] = None,
    resume: bool = True,
) -> RunResult:
    """
    Run a framework on a task in its content addressed run directory, <runs_dir>/<run id>.  The events are
    mirrored to the directory as they happen, the result is written once the run is over.  A run whose
    result already exists is not executed again.
    """
    run_id = derive_run_id(framework, task, seed)
    run_dir = runs_dir / run_id
    if resume and (run_dir / RESULT_FILE).exists():
        LOGGER.info(f"Run {run_id} already done, resuming from {run_dir}")
        return load_run(run_dir)

    result = run_agent(
        framework,
        task,
        gateway,
        TrajectoryRecorder(run_dir=run_dir),
        run_id=run_id,
        seed=seed,
        storage=storage,
        base_dir=base_dir,
        dialect_hint=dialect_hint,
    )
    record: Dict[str, Any] = {"result": result.summary(), "metadata": result.trajectory.metadata.model_dump(mode="json")}
    (run_dir / RESULT_FILE).write_text(json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False), encoding="utf-8")
    return result


def load_run(run_dir: Path) -> RunResult:
    """
    Load a finished run back from its directory.
    """
    record = json.loads((run_dir / RESULT_FILE).read_text(encoding="utf-8"))
    trajectory = Trajectory(
        events=read_events(run_dir / EVENTS_FILE),
        metadata=TrajectoryMetadata.model_validate(record["metadata"]),
    )
    return RunResult.model_validate({**record["result"], "trajectory": trajectory})
