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

from agentscale.quality.detectors import detect_phantom_artifacts, detect_repetition, detect_truncation, run_detectors
from agentscale.quality.judges import RuleJudge, ScriptedJudge, assess_iteratively, assess_whole, parse_judge_output
from agentscale.quality.report import Assessment, Issue, IssueReport, JudgeState, Verdict
from agentscale.quality.supervisor import (
    ChecklistSupervisor,
    CheckResult,
    RepairOutcome,
    ScriptedSupervisor,
    Supervisor,
    SupervisorVerdict,
    run_repair_loop,
    supervisor_descriptor,
)
from agentscale.quality.taxonomy import IssueCategory, IssueTaxonomy, Severity, load_issue_taxonomy, parse_issue_taxonomy

__all__ = [
    "Assessment",
    "CheckResult",
    "ChecklistSupervisor",
    "Issue",
    "IssueCategory",
    "IssueReport",
    "IssueTaxonomy",
    "JudgeState",
    "RepairOutcome",
    "RuleJudge",
    "ScriptedJudge",
    "ScriptedSupervisor",
    "Severity",
    "Supervisor",
    "SupervisorVerdict",
    "Verdict",
    "assess_iteratively",
    "assess_whole",
    "detect_phantom_artifacts",
    "detect_repetition",
    "detect_truncation",
    "load_issue_taxonomy",
    "parse_issue_taxonomy",
    "parse_judge_output",
    "run_detectors",
    "run_repair_loop",
    "supervisor_descriptor",
]
