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

from typing import Dict, List

from agentscale.exceptions import DialectError
from agentscale.trajectory.dialects.base import Dialect
from agentscale.trajectory.dialects.openai import OpenAIJsonDialect
from agentscale.trajectory.dialects.textual import BracketFnDialect, MarkdownJsonDialect, RolePrefixedDialect
from agentscale.trajectory.dialects.xml import XmlBlockDialect, XmlInlineDialect, XmlInlineMultiDialect

DIALECTS: Dict[str, Dialect] = {
    dialect.id: dialect
    for dialect in (
        OpenAIJsonDialect(),
        XmlInlineDialect(),
        XmlInlineMultiDialect(),
        XmlBlockDialect(),
        BracketFnDialect(),
        MarkdownJsonDialect(),
        RolePrefixedDialect(),
    )
}

DIALECT_IDS: List[str] = list(DIALECTS)


def get_dialect(dialect_id: str) -> Dialect:
    try:
        return DIALECTS[dialect_id]
    except KeyError:
        raise DialectError(f"Unknown dialect {dialect_id!r}, expected one of {', '.join(DIALECT_IDS)}")
