"""Deterministic guardrails and plan validation.

Guardrail file: a JSON array of objects::

    {"id": "nic-cap", "kind": "cap",
     "selector": {"actions": ["SetQoSClass", "CapBandwidth"], "target": "*"},
     "limit": {"value": 100, "unit": "MB/s"}}

``kind`` is one of cap, floor, allowed_set, immutable, aggregate_cap.
``selector.target`` and ``selector.link`` are shell-style globs; an optional
``selector.field`` names the numeric field to check instead of the action's
default quantity.  ``allowed_set`` takes ``{"values": [...]}``;
``immutable`` takes no limit.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from pathlib import Path
from typing import Any, Iterable, Sequence

from idss.policyir.actions import ACTION_TYPES, Action, PolicyPlan

KINDS = ("cap", "floor", "allowed_set", "immutable", "aggregate_cap")

_UNITS = {
    "": 1, "b": 1, "count": 1, "iops": 1,
    "kb": 1e3, "mb": 1e6, "gb": 1e9, "tb": 1e12,
    "kib": 1024, "mib": 1024**2, "gib": 1024**3, "tib": 1024**4,
}


class GuardrailError(ValueError):
    pass


def to_base_units(value: float, unit: str = "") -> float:
    """Convert ``value unit`` to bytes, bytes/s or a plain count.

    KB/MB/GB are decimal, KiB/MiB/GiB binary; a trailing ``/s`` is accepted.
    """
    u = unit.strip().lower()
    if u.endswith("/s"):
        u = u[:-2]
    if u == "bps":
        u = "b"
    if u not in _UNITS:
        raise GuardrailError(f"unknown unit {unit!r}")
    return float(value) * _UNITS[u]


@dataclass(frozen=True)
class Selector:
    actions: tuple[str, ...] = ()
    target: str = "*"
    link: str | None = None
    field: str | None = None

    def matches(self, a: Action) -> bool:
        if self.actions and a.kind not in self.actions:
            return False
        if not fnmatchcase(a.subject, self.target):
            return False
        if self.link is not None:
            link = a.link_id
            if link is None or not fnmatchcase(link, self.link):
                return False
        return True

    def quantity(self, a: Action) -> float | None:
        if self.field is not None:
            return getattr(a, self.field, None)
        return a.quantity


@dataclass(frozen=True)
class Guardrail:
    id: str
    kind: str
    selector: Selector = field(default_factory=Selector)
    limit: float | None = None
    values: frozenset[str] = frozenset()
    description: str = ""

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Guardrail":
        if not isinstance(d, dict):
            raise GuardrailError(f"guardrail must be an object, got {d!r}")
        gid = d.get("id")
        kind = d.get("kind")
        if not gid or not isinstance(gid, str):
            raise GuardrailError("guardrail without a string id")
        if kind not in KINDS:
            raise GuardrailError(f"{gid}: unknown kind {kind!r}")
        sel = d.get("selector", {})
        acts = tuple(sel.get("actions", ()))
        for a in acts:
            if a not in ACTION_TYPES:
                raise GuardrailError(f"{gid}: selector names unknown action {a!r}")
        selector = Selector(acts, sel.get("target", "*"), sel.get("link"), sel.get("field"))
        lim = d.get("limit")
        limit, values = None, frozenset()
        if kind in ("cap", "floor", "aggregate_cap"):
            if not isinstance(lim, dict) or not isinstance(lim.get("value"), (int, float)):
                raise GuardrailError(f"{gid}: {kind} needs limit.value as a number")
            limit = to_base_units(lim["value"], lim.get("unit", ""))
            if limit < 0:
                raise GuardrailError(f"{gid}: negative limit")
        elif kind == "allowed_set":
            if not isinstance(lim, dict) or not isinstance(lim.get("values"), list) \
                    or not lim["values"]:
                raise GuardrailError(f"{gid}: allowed_set needs a non-empty limit.values")
            values = frozenset(str(v) for v in lim["values"])
        elif lim is not None:
            raise GuardrailError(f"{gid}: immutable takes no limit")
        return cls(gid, kind, selector, limit, values, d.get("description", ""))


def parse_guardrails(text: str) -> list[Guardrail]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GuardrailError(f"guardrail file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise GuardrailError("guardrail file must be a JSON array")
    rails = [Guardrail.from_dict(d) for d in data]
    ids = [g.id for g in rails]
    if len(set(ids)) != len(ids):
        raise GuardrailError("duplicate guardrail ids")
    return rails


def load_guardrails(path: str | Path) -> list[Guardrail]:
    return parse_guardrails(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Violation:
    guardrail: str
    action: Action
    message: str

    def to_dict(self) -> dict:
        return {"guardrail": self.guardrail, "action": self.action.to_dict(),
                "message": self.message}


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def accepted(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"accepted": self.accepted,
                "violations": [v.to_dict() for v in self.violations]}


def _fmt(x: float) -> str:
    return f"{x:g}"


def _check(g: Guardrail, actions: Sequence[Action]) -> Iterable[Violation]:
    matched = [a for a in actions if g.selector.matches(a)]
    if g.kind == "immutable":
        for a in matched:
            yield Violation(g.id, a, f"{g.id}: {a.kind} on {a.subject!r} is not permitted")
    elif g.kind == "allowed_set":
        for a in matched:
            v = a.setting if g.selector.field is None else str(getattr(a, g.selector.field, None))
            if v not in g.values:
                yield Violation(g.id, a, f"{g.id}: {a.kind} value {v!r} on {a.subject!r} "
                                         f"not in allowed set {sorted(g.values)}")
    elif g.kind in ("cap", "floor"):
        for a in matched:
            q = g.selector.quantity(a)
            if q is None:
                continue
            if g.kind == "cap" and q > g.limit:
                yield Violation(g.id, a, f"{g.id}: {a.kind} on {a.subject!r} requests "
                                         f"{_fmt(q)} > cap {_fmt(g.limit)}")
            elif g.kind == "floor" and q < g.limit:
                yield Violation(g.id, a, f"{g.id}: {a.kind} on {a.subject!r} requests "
                                         f"{_fmt(q)} < floor {_fmt(g.limit)}")
    else:
        per_link: dict[str | None, list[Action]] = defaultdict(list)
        for a in matched:
            if g.selector.quantity(a) is not None:
                per_link[a.link_id].append(a)
        for link, acts in per_link.items():
            total = 0.0
            for a in acts:
                total += g.selector.quantity(a)
                if total > g.limit:
                    yield Violation(g.id, a, f"{g.id}: aggregate on link {link!r} reaches "
                                             f"{_fmt(total)} > cap {_fmt(g.limit)} at "
                                             f"{a.kind} on {a.subject!r}")
                    break


def validate(plan: PolicyPlan, guardrails: Iterable[Guardrail]) -> ValidationResult:
    """Check every action against every guardrail; unmatched rails pass."""
    out: list[Violation] = []
    for g in guardrails:
        out.extend(_check(g, plan.actions))
    return ValidationResult(tuple(out))
