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
import threading
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from agentscale.exceptions import RecorderClosed
from agentscale.trajectory.events import EventKind, RunStatus, Trajectory, TrajectoryEvent, TrajectoryMetadata

LOGGER = logging.getLogger(__name__)

EVENTS_FILE = "events.jsonl"


class TrajectoryRecorder:
    """
    Collect the events of one run.  The recorder is opened for a run id, assigns sequence numbers to the
    events it receives and is finalized by the run_end event, after which it refuses any new event.

    If a run directory is given, every event is also appended to its event log as soon as it is recorded.
    """

    def __init__(self, *, clock: Optional[Callable[[], float]] = None, run_dir: Optional[Path] = None) -> None:
        """
        :param clock: The function giving the wall time of each event, time.time by default
        :param run_dir: The directory to mirror the events into
        """
        self.clock = clock or time.time
        self.run_dir = run_dir

        self._lock = threading.Lock()
        self._events: List[TrajectoryEvent] = []
        self._metadata: Optional[TrajectoryMetadata] = None
        self._seq = 0
        self._finalized = False

    @property
    def opened(self) -> bool:
        return self._metadata is not None and not self._finalized

    @property
    def finalized(self) -> bool:
        return self._finalized

    @property
    def log_path(self) -> Optional[Path]:
        return self.run_dir / EVENTS_FILE if self.run_dir is not None else None

    def open(self, metadata: TrajectoryMetadata) -> None:
        with self._lock:
            if self._metadata is not None:
                raise RuntimeError(f"This recorder has already been opened for run {self._metadata.run_id}")
            self._metadata = metadata.model_copy()

        if self.run_dir is not None:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            # A previous, unfinished attempt of the same run is discarded
            self.log_path.write_text("", encoding="utf-8")  # type: ignore

    def record(
        self, kind: EventKind, context_path: Tuple[str, ...], payload: Optional[Dict[str, Any]] = None
    ) -> TrajectoryEvent:
        """
        Append an event to the trajectory and return it with its sequence number.

        :raises RecorderClosed: If the recorder is not opened, or the run already ended
        """
        with self._lock:
            if self._metadata is None or self._finalized:
                raise RecorderClosed(f"Can not record a {kind.value} event, the recorder is not open")

            self._seq += 1
            event = TrajectoryEvent(
                seq=self._seq,
                run_id=self._metadata.run_id,
                context_path=tuple(context_path),
                kind=kind,
                payload=dict(payload or {}),
                wall_time=self.clock(),
            )
            self._events.append(event)

            if kind == EventKind.RUN_END:
                self._metadata.status = RunStatus(event.payload["status"])
                self._finalized = True

            if self.log_path is not None:
                with open(self.log_path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(event.model_dump(mode="json"), ensure_ascii=False) + "\n")

        return event

    @property
    def trajectory(self) -> Trajectory:
        """
        A snapshot of the trajectory recorded so far.
        """
        with self._lock:
            metadata = self._metadata.model_copy() if self._metadata is not None else TrajectoryMetadata()
            return Trajectory(events=list(self._events), metadata=metadata)
