"""Append-only experience log (newline-delimited JSON) with versioned rollback."""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from idss.policyir.actions import PolicyPlan

logger = logging.getLogger(__name__)

STATUSES = ("stable", "applied", "rejected", "regressed", "rollback")


class ExperienceError(RuntimeError):
    pass


class UnknownVersion(ExperienceError, KeyError):
    pass


@dataclass(frozen=True)
class ExperienceRecord:
    version: int
    timestamp: float
    plan: PolicyPlan
    metrics: Mapping[str, float] = field(default_factory=dict)
    note: str = ""
    status: str = "applied"
    rollback_of: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"version": self.version, "timestamp": self.timestamp,
                "plan": self.plan.to_dict(), "metrics": dict(self.metrics),
                "note": self.note, "status": self.status,
                "rollback_of": self.rollback_of}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExperienceRecord":
        return cls(int(d["version"]), float(d["timestamp"]),
                   PolicyPlan.from_dict(d["plan"]), dict(d.get("metrics", {})),
                   d.get("note", ""), d.get("status", "applied"), d.get("rollback_of"))


class ExperienceDB:
    """Versioned experience records.  ``path=None`` keeps them in memory.

    One writer at a time; every append is flushed and fsynced before the
    version is returned, so readers only ever see committed lines.
    """

    def __init__(self, path: str | Path | None = None,
                 clock: Callable[[], float] = time.time):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self._mem: list[ExperienceRecord] = []

    def records(self) -> list[ExperienceRecord]:
        if self.path is None:
            return list(self._mem)
        if not self.path.exists():
            return []
        out = []
        lines = self.path.read_text(encoding="utf-8").split("\n")
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                out.append(ExperienceRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                if i == len(lines) - 1:
                    # torn final write from a crash; ignore it
                    logger.warning("%s: ignoring incomplete trailing record", self.path)
                    continue
                raise ExperienceError(f"{self.path}: corrupt record on line {i + 1}: {exc}")
        return out

    def latest_version(self) -> int:
        recs = self.records()
        return recs[-1].version if recs else 0

    def get(self, version: int) -> ExperienceRecord:
        for r in self.records():
            if r.version == version:
                return r
        raise UnknownVersion(f"unknown experience version {version}")

    def last_with_status(self, *statuses: str) -> ExperienceRecord | None:
        for r in reversed(self.records()):
            if r.status in statuses:
                return r
        return None

    def append(self, plan: PolicyPlan, metrics: Mapping[str, float] | None = None,
               note: str = "", status: str = "applied",
               rollback_of: int | None = None) -> int:
        if status not in STATUSES:
            raise ExperienceError(f"unknown status {status!r}")
        rec = ExperienceRecord(self.latest_version() + 1, float(self.clock()), plan,
                               dict(metrics or {}), note, status, rollback_of)
        if self.path is None:
            self._mem.append(rec)
            return rec.version
        line = json.dumps(rec.to_dict(), sort_keys=True, ensure_ascii=False) + "\n"
        try:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise ExperienceError(f"cannot append to {self.path}: {exc}") from exc
        return rec.version

    def seed(self, path: str | Path) -> list[int]:
        """Load stable configurations from a JSON array (or NDJSON) of
        ``{"plan": ..., "metrics": ..., "note": ...}`` objects."""
        text = Path(path).read_text(encoding="utf-8").strip()
        if text.startswith("["):
            items = json.loads(text)
        else:
            items = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
        return [self.append(PolicyPlan.from_dict(it["plan"]), it.get("metrics"),
                            it.get("note", "stable configuration"), "stable")
                for it in items]


def record_experience(db: ExperienceDB, plan: PolicyPlan,
                      metrics: Mapping[str, float] | None = None, note: str = "",
                      status: str = "applied", rollback_of: int | None = None) -> int:
    return db.append(plan, metrics, note, status, rollback_of)


def rollback(db: ExperienceDB, version: int) -> PolicyPlan:
    """Return the plan stored at ``version``; the log is not touched.

    Callers re-emitting the plan record it with ``rollback_of=version``.
    """
    return db.get(version).plan
