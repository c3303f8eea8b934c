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
from typing import Any, Dict, Iterable, List, Sequence, Union

from agentscale.exceptions import MixedDialectError
from agentscale.helpers.utils import digest
from agentscale.trajectory.dialects.registry import get_dialect
from agentscale.trajectory.events import Trajectory
from agentscale.trajectory.normalize import render_samples

LOGGER = logging.getLogger(__name__)

EXPORT_SCHEMA_VERSION = 1


def export_records(trajectory: Trajectory, dialect: str) -> List[Dict[str, Any]]:
    """
    Build the export records of one trajectory, one per context.
    """
    records: List[Dict[str, Any]] = []
    for path, rendered in render_samples(trajectory, dialect):
        context_path = "/".join(path)
        records.append(
            {
                "schema_version": EXPORT_SCHEMA_VERSION,
                "sample_id": digest(trajectory.metadata.run_id, context_path, dialect, length=16),
                "framework": trajectory.metadata.framework,
                "context_path": context_path,
                "dialect": dialect,
                "rendered": rendered,
                "metadata": {
                    "run_id": trajectory.metadata.run_id,
                    "task": trajectory.metadata.task,
                    "status": trajectory.metadata.status.value if trajectory.metadata.status else None,
                    "node_count": trajectory.metadata.node_count,
                    "origin_dialect": trajectory.metadata.dialect,
                    "tools": [tool.model_dump(mode="json") for tool in trajectory.tools(path)],
                },
            }
        )
    return records


def export_jsonl(trajectories: Iterable[Trajectory], dialect: Union[str, Sequence[str]], path: Path) -> int:
    """
    Write every context of every trajectory as one json line of the output file.

    :param dialect: The dialect of the file.  A file holds a single dialect, asking for several of them is an error.
    :return: The number of lines written
    :raises MixedDialectError: If more than one dialect is requested
    :raises UnrepresentableFeature: If a trajectory can not be expressed in the dialect
    """
    if not isinstance(dialect, str):
        dialects = sorted(set(dialect))
        if len(dialects) != 1:
            raise MixedDialectError(f"One export file holds one dialect, got {dialects}")
        dialect = dialects[0]

    # Fail on unknown dialects before touching the file
    get_dialect(dialect)

    # The target is only replaced once every sample is written
    count = 0
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(f"{path.name}.part")
    try:
        with open(partial, "w", encoding="utf-8") as f:
            for trajectory in trajectories:
                for record in export_records(trajectory, dialect):
                    f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
                    count += 1
        partial.replace(path)
    finally:
        partial.unlink(missing_ok=True)

    LOGGER.info(f"Exported {count} {dialect} sample(s) to {path}")
    return count
