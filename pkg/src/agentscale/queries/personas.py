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

from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import ValidationError

from agentscale.data import PERSONAS
from agentscale.exceptions import SchemaError
from agentscale.queries.models import PersonaProfile


def load_personas(path: Optional[Path] = None) -> List[PersonaProfile]:
    """
    Load a persona library, the bundled one if no path is given.

    :raises SchemaError: A persona is invalid, or two share a name
    """
    data = yaml.safe_load((path or PERSONAS).read_text(encoding="utf-8")) or {}
    personas: List[PersonaProfile] = []
    for index, entry in enumerate(data.get("personas", [])):
        try:
            personas.append(PersonaProfile.model_validate(entry))
        except ValidationError as e:
            raise SchemaError(f"Invalid persona: {e}", path=f"personas[{index}]")

    names = [p.name for p in personas]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise SchemaError(f"Personas must have unique names, duplicated: {duplicates}", path="personas")
    if not personas:
        raise SchemaError("The persona library is empty", path="personas")

    return personas
