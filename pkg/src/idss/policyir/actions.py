"""Vendor-neutral configuration actions and plans.

All sizes are bytes and all rates are bytes per second.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from typing import Any, ClassVar, Mapping

from idss.cachesim.policies import PolicyKind


class PlanError(ValueError):
    pass


def _ident(name: str, value: str):
    if not isinstance(value, str) or not value:
        raise PlanError(f"{name} must be a non-empty identifier")


def _nonneg(name: str, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        raise PlanError(f"{name} must be a non-negative number, got {value!r}")


@dataclass(frozen=True)
class Action:
    kind: ClassVar[str] = ""
    target_field: ClassVar[str] = ""
    quantity_field: ClassVar[str | None] = None
    value_field: ClassVar[str | None] = None

    @property
    def subject(self) -> str:
        """The identifier this action configures (device, client, class...)."""
        return getattr(self, self.target_field)

    @property
    def link_id(self) -> str | None:
        return getattr(self, "link", None)

    @property
    def quantity(self) -> float | None:
        return None if self.quantity_field is None else getattr(self, self.quantity_field)

    @property
    def setting(self) -> str | None:
        return None if self.value_field is None else str(getattr(self, self.value_field))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"action": self.kind}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, PolicyKind) else v
        return out


@dataclass(frozen=True)
class SetCachePolicy(Action):
    kind: ClassVar[str] = "SetCachePolicy"
    target_field: ClassVar[str] = "target"
    value_field: ClassVar[str] = "policy"
    target: str
    policy: PolicyKind

    def __post_init__(self):
        _ident("target", self.target)
        object.__setattr__(self, "policy", PolicyKind.parse(self.policy))


@dataclass(frozen=True)
class SetCacheSize(Action):
    kind: ClassVar[str] = "SetCacheSize"
    target_field: ClassVar[str] = "target"
    quantity_field: ClassVar[str] = "bytes"
    target: str
    bytes: int

    def __post_init__(self):
        _ident("target", self.target)
        _nonneg("bytes", self.bytes)


@dataclass(frozen=True)
class SetReadAhead(Action):
    kind: ClassVar[str] = "SetReadAhead"
    target_field: ClassVar[str] = "target"
    quantity_field: ClassVar[str] = "bytes"
    target: str
    bytes: int

    def __post_init__(self):
        _ident("target", self.target)
        _nonneg("bytes", self.bytes)


@dataclass(frozen=True)
class ReserveBandwidth(Action):
    kind: ClassVar[str] = "ReserveBandwidth"
    target_field: ClassVar[str] = "client"
    quantity_field: ClassVar[str] = "bps"
    client: str
    bps: float
    link: str

    def __post_init__(self):
        _ident("client", self.client)
        _ident("link", self.link)
        _nonneg("bps", self.bps)


@dataclass(frozen=True)
class CapBandwidth(Action):
    kind: ClassVar[str] = "CapBandwidth"
    target_field: ClassVar[str] = "client"
    quantity_field: ClassVar[str] = "bps"
    client: str
    bps: float
    link: str

    def __post_init__(self):
        _ident("client", self.client)
        _ident("link", self.link)
        _nonneg("bps", self.bps)


@dataclass(frozen=True)
class SetIOScheduler(Action):
    kind: ClassVar[str] = "SetIOScheduler"
    target_field: ClassVar[str] = "target"
    value_field: ClassVar[str] = "name"
    target: str
    name: str

    def __post_init__(self):
        _ident("target", self.target)
        _ident("name", self.name)


@dataclass(frozen=True)
class SetQoSClass(Action):
    kind: ClassVar[str] = "SetQoSClass"
    target_field: ClassVar[str] = "name"
    quantity_field: ClassVar[str] = "max_bw"
    name: str
    max_bw: float
    max_iops: int | None = None

    def __post_init__(self):
        _ident("name", self.name)
        _nonneg("max_bw", self.max_bw)
        if self.max_iops is not None:
            _nonneg("max_iops", self.max_iops)


@dataclass(frozen=True)
class DisableServerCache(Action):
    kind: ClassVar[str] = "DisableServerCache"
    target_field: ClassVar[str] = "segment"
    segment: str

    def __post_init__(self):
        _ident("segment", self.segment)


@dataclass(frozen=True)
class SetFsParam(Action):
    kind: ClassVar[str] = "SetFsParam"
    target_field: ClassVar[str] = "key"
    value_field: ClassVar[str] = "value"
    key: str
    value: str

    def __post_init__(self):
        _ident("key", self.key)
        object.__setattr__(self, "value", str(self.value))


ACTION_TYPES: dict[str, type[Action]] = {
    t.kind: t for t in (SetCachePolicy, SetCacheSize, SetReadAhead, ReserveBandwidth,
                        CapBandwidth, SetIOScheduler, SetQoSClass,
                        DisableServerCache, SetFsParam)
}


def action_from_dict(d: Mapping[str, Any]) -> Action:
    d = dict(d)
    kind = d.pop("action", None)
    if kind not in ACTION_TYPES:
        raise PlanError(f"unknown action {kind!r}")
    cls = ACTION_TYPES[kind]
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for k, v in d.items():
        if k not in names:
            raise PlanError(f"{kind}: unexpected field {k!r}")
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise PlanError(f"{kind}: {exc}") from exc


def action_to_dict(a: Action) -> dict[str, Any]:
    return a.to_dict()


@dataclass(frozen=True)
class PolicyPlan:
    actions: tuple[Action, ...] = ()
    plan_id: str = ""
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        seen = set()
        for a in self.actions:
            if not isinstance(a, Action):
                raise PlanError(f"not an action: {a!r}")
            key = (a.kind, a.subject)
            if key in seen:
                raise PlanError(f"plan sets {a.kind} on {a.subject!r} twice")
            seen.add(key)

    def __len__(self):
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def to_dict(self) -> dict[str, Any]:
        return {"plan_id": self.plan_id, "provenance": dict(self.provenance),
                "actions": [action_to_dict(a) for a in self.actions]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False,
                          separators=(",", ":")) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PolicyPlan":
        if isinstance(d, list):
            d = {"actions": d}
        acts = d.get("actions")
        if not isinstance(acts, list):
            raise PlanError("plan must carry an 'actions' list")
        return cls(tuple(action_from_dict(a) for a in acts),
                   str(d.get("plan_id", "")), dict(d.get("provenance", {})))

    @classmethod
    def from_json(cls, text: str) -> "PolicyPlan":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise PlanError(f"plan is not valid JSON: {exc}") from exc
