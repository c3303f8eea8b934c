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

import copy
import threading
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

SHARED_NAMESPACE = "shared"


class Versioned(NamedTuple):
    value: Any
    version: int


class CasResult(NamedTuple):
    """
    Outcome of a compare-and-swap.  On success, version is the new version of the key, on conflict it
    is the current one (0 if the key is absent).
    """

    ok: bool
    version: int


class GlobalStorage:
    """
    Namespaced key value store shared by all the contexts of a run, and across runs through the shared
    namespace.  Every mutation of a key bumps its version, starting at 1.  All operations are atomic.

    Values are copied in and out, so no caller can mutate a stored value in place.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data: Dict[Tuple[str, str], Versioned] = {}

    def get(self, namespace: str, key: str) -> Optional[Any]:
        entry = self.get_versioned(namespace, key)
        return entry.value if entry is not None else None

    def get_versioned(self, namespace: str, key: str) -> Optional[Versioned]:
        with self._lock:
            entry = self._data.get((namespace, key))
        return Versioned(copy.deepcopy(entry.value), entry.version) if entry is not None else None

    def version(self, namespace: str, key: str) -> int:
        with self._lock:
            entry = self._data.get((namespace, key))
        return entry.version if entry is not None else 0

    def put(self, namespace: str, key: str, value: Any) -> int:
        value = copy.deepcopy(value)
        with self._lock:
            current = self._data.get((namespace, key))
            version = current.version + 1 if current is not None else 1
            self._data[(namespace, key)] = Versioned(value, version)
        return version

    def cas(self, namespace: str, key: str, expected_version: int, value: Any) -> CasResult:
        """
        Write value only if the current version of the key is expected_version.  An expected version of 0
        means the key must be absent.
        """
        value = copy.deepcopy(value)
        with self._lock:
            current = self._data.get((namespace, key))
            current_version = current.version if current is not None else 0
            if current_version != expected_version:
                return CasResult(ok=False, version=current_version)

            self._data[(namespace, key)] = Versioned(value, current_version + 1)
            return CasResult(ok=True, version=current_version + 1)

    def keys(self, namespace: str, prefix: str = "") -> List[str]:
        with self._lock:
            return sorted(key for ns, key in self._data if ns == namespace and key.startswith(prefix))


def storage_get(storage: GlobalStorage, namespace: str, key: str) -> Optional[Any]:
    return storage.get(namespace, key)


def storage_put(storage: GlobalStorage, namespace: str, key: str, value: Any) -> int:
    return storage.put(namespace, key, value)


def storage_cas(storage: GlobalStorage, namespace: str, key: str, expected_version: int, value: Any) -> CasResult:
    return storage.cas(namespace, key, expected_version, value)
