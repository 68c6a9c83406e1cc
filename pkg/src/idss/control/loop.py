"""The acquire -> organize -> advise -> validate -> translate -> apply ->
measure -> record control loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from idss.advisor import Advisor, AuditLog, KnowledgeStore, Objective, advise_plan
from idss.control.experience import ExperienceDB
from idss.policyir import (
    CommandScript,
    Guardrail,
    PolicyPlan,
    ValidationResult,
    translate,
    validate,
)
from idss.telemetry import (
    DEFAULT_WHITELIST,
    ClientTelemetry,
    ServerState,
    extract_profile,
    organize,
)
from idss.trace import AccessTrace, prefix

logger = logging.getLogger(__name__)

STAGES = ("acquire", "organize", "advise", "validate", "translate", "apply",
          "measure", "record")
DEFAULT_REGRESSION = 0.05

Evaluator = Callable[[PolicyPlan], Mapping[str, float]]


@dataclass(frozen=True)
class ClientInput:
    telemetry: ClientTelemetry
    trace: AccessTrace
    intent: str = ""
    prefix_len: int = 400


@dataclass
class LoopReport:
    stages: list[str] = field(default_factory=list)
    doc_hash: str = ""
    plan: PolicyPlan | None = None
    validation: ValidationResult | None = None
    commands: CommandScript | None = None
    metrics: dict[str, float] = field(default_factory=dict)
    experience_version: int | None = None
    rollback: bool = False
    reemitted_plan: PolicyPlan | None = None
    error: str | None = None

    @property
    def accepted(self) -> bool:
        return self.validation is not None and self.validation.accepted

    def to_dict(self) -> dict[str, Any]:
        return {
            "stages": list(self.stages), "doc_hash": self.doc_hash,
            "plan": self.plan.to_dict() if self.plan else None,
            "validation": self.validation.to_dict() if self.validation else None,
            "commands": list(self.commands.commands) if self.commands else [],
            "backend": self.commands.backend if self.commands else None,
            "metrics": dict(self.metrics),
            "experience_version": self.experience_version,
            "rollback": self.rollback,
            "reemitted_plan": self.reemitted_plan.to_dict() if self.reemitted_plan else None,
            "error": self.error,
        }


class LoopError(RuntimeError):
    """A stage failed; ``report`` holds everything completed before it."""

    def __init__(self, stage: str, cause: Exception, report: LoopReport):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.report = report


def run_loop(clients: Sequence[ClientInput], server: ServerState, objective: Objective,
             guardrails: Iterable[Guardrail], advisor: Advisor, backend: str,
             evaluator: Evaluator, db: ExperienceDB | None = None,
             knowledge: KnowledgeStore | None = None,
             constraints: Mapping[str, Any] | None = None,
             metric: str = "hit_rate", threshold: float = DEFAULT_REGRESSION,
             whitelist: Iterable[str] = DEFAULT_WHITELIST,
             audit: AuditLog | None = None) -> LoopReport:
    """Run one pass of the loop.

    A rejected plan stops before translation and is logged as ``rejected``.
    If the measured ``metric`` falls more than ``threshold`` (relative)
    below the last applied experience, the attempt is logged as
    ``regressed`` and the previous plan is re-emitted and logged as a
    rollback.
    """
    db = db if db is not None else ExperienceDB()
    report = LoopReport()
    stage = STAGES[0]
    try:
        entries = []
        for c in clients:
            profile = extract_profile(prefix(c.trace, c.prefix_len))
            entries.append((c.telemetry, profile, c.intent))
        report.stages.append(stage)

        stage = "organize"
        doc = organize(entries, server, constraints, whitelist)
        report.doc_hash = doc.digest()
        report.stages.append(stage)

        stage = "advise"
        plan = advise_plan(advisor, doc, objective, knowledge, audit=audit)
        report.plan = plan
        report.stages.append(stage)

        stage = "validate"
        result = validate(plan, list(guardrails))
        report.validation = result
        report.stages.append(stage)
        if not result.accepted:
            stage = "record"
            note = "; ".join(v.message for v in result.violations)
            report.experience_version = db.append(plan, {}, f"rejected: {note}", "rejected")
            report.stages.append(stage)
            return report

        stage = "translate"
        report.commands = translate(plan, backend)
        report.stages.append(stage)

        # Commands are dry-run artifacts; nothing is executed.
        stage = "apply"
        report.stages.append(stage)

        stage = "measure"
        report.metrics = dict(evaluator(plan))
        report.stages.append(stage)

        stage = "record"
        previous = db.last_with_status("applied", "stable", "rollback")
        measured = report.metrics.get(metric)
        regressed = False
        if previous is not None and measured is not None:
            base = previous.metrics.get(metric)
            if base is not None and base > 0 and measured < base * (1.0 - threshold):
                regressed = True
        if not regressed:
            report.experience_version = db.append(plan, report.metrics, "applied", "applied")
        else:
            db.append(plan, report.metrics,
                      f"{metric} {measured:.6g} fell more than {threshold:.0%} below "
                      f"v{previous.version} ({previous.metrics[metric]:.6g})", "regressed")
            report.rollback = True
            report.reemitted_plan = previous.plan
            report.commands = translate(previous.plan, backend)
            report.experience_version = db.append(
                previous.plan, previous.metrics, f"rollback to v{previous.version}",
                "rollback", rollback_of=previous.version)
        report.stages.append(stage)
        return report
    except Exception as exc:
        report.error = f"{stage}: {type(exc).__name__}: {exc}"
        raise LoopError(stage, exc, report) from exc
