"""Backends that turn plans into platform commands.

``linux-dryrun`` renders shell text that is never executed.  ``mockvendor``
renders structured API records and can be parsed back into a plan.
"""

from __future__ import annotations

import json
import math
import shlex
from dataclasses import dataclass
from typing import Any, Callable

from idss.policyir.actions import (
    Action,
    CapBandwidth,
    DisableServerCache,
    PlanError,
    PolicyPlan,
    ReserveBandwidth,
    SetCachePolicy,
    SetCacheSize,
    SetFsParam,
    SetIOScheduler,
    SetQoSClass,
    SetReadAhead,
)

SECTOR = 512
DRYRUN_HEADER = "# DRY-RUN: generated commands; not executed"
BACKENDS = ("linux-dryrun", "mockvendor")


class UnsupportedAction(PlanError):
    pass


@dataclass(frozen=True)
class CommandScript:
    backend: str
    commands: tuple  # str lines for linux-dryrun, dict records for mockvendor
    executable: bool = False

    def render(self) -> str:
        if self.backend == "mockvendor":
            return json.dumps(list(self.commands), indent=1, sort_keys=True) + "\n"
        return "\n".join((DRYRUN_HEADER, *self.commands)) + "\n"

    def __len__(self):
        return len(self.commands)


def _q(s: str) -> str:
    return shlex.quote(s)


def _linux(a: Action) -> str:
    if isinstance(a, SetReadAhead):
        sectors = math.ceil(a.bytes / SECTOR)
        return f"blockdev --setra {sectors} {_q(a.target)}"
    if isinstance(a, SetIOScheduler):
        dev = a.target.rsplit("/", 1)[-1]
        return f"echo {_q(a.name)} > /sys/block/{dev}/queue/scheduler"
    if isinstance(a, SetFsParam):
        return f"mount -o remount,{_q(f'{a.key}={a.value}')} /"
    if isinstance(a, CapBandwidth):
        bps = int(a.bps)
        return (f"echo \"{a.link} rbps={bps} wbps={bps}\" > "
                f"/sys/fs/cgroup/{a.client}/io.max")
    raise UnsupportedAction(f"action {a.kind} is not supported by backend linux-dryrun")


_VENDOR_OPS: dict[type, tuple[str, Callable[[Action], dict]]] = {
    SetCachePolicy: ("cache.policy.set", lambda a: {"target": a.target, "policy": a.policy.value}),
    SetCacheSize: ("cache.size.set", lambda a: {"target": a.target, "bytes": a.bytes}),
    SetReadAhead: ("prefetch.readahead.set", lambda a: {"target": a.target, "bytes": a.bytes}),
    ReserveBandwidth: ("bw.reserve", lambda a: {"client": a.client, "bps": a.bps, "link": a.link}),
    CapBandwidth: ("bw.cap", lambda a: {"client": a.client, "bps": a.bps, "link": a.link}),
    SetIOScheduler: ("io.scheduler.set", lambda a: {"target": a.target, "name": a.name}),
    SetQoSClass: ("qos.create", lambda a: {"name": a.name, "max_bw": a.max_bw,
                                           "max_iops": a.max_iops}),
    DisableServerCache: ("cache.segment.disable", lambda a: {"segment": a.segment}),
    SetFsParam: ("fs.param.set", lambda a: {"key": a.key, "value": a.value}),
}
_OP_TYPES = {op: cls for cls, (op, _) in _VENDOR_OPS.items()}


def _vendor(a: Action) -> dict[str, Any]:
    try:
        op, fn = _VENDOR_OPS[type(a)]
    except KeyError:
        raise UnsupportedAction(f"action {a.kind} is not supported by backend mockvendor")
    return {"op": op, **fn(a)}


def translate(plan: PolicyPlan, backend: str = "mockvendor") -> CommandScript:
    if backend == "linux-dryrun":
        return CommandScript(backend, tuple(_linux(a) for a in plan))
    if backend == "mockvendor":
        return CommandScript(backend, tuple(_vendor(a) for a in plan))
    raise PlanError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def parse_commands(script: CommandScript | str | list, backend: str = "mockvendor") -> PolicyPlan:
    """Rebuild a plan from mockvendor records (a script, JSON text, or list)."""
    if backend != "mockvendor":
        raise PlanError(f"parse_commands supports only mockvendor, got {backend!r}")
    if isinstance(script, CommandScript):
        records = list(script.commands)
    elif isinstance(script, str):
        records = json.loads(script) if script.strip() else []
    else:
        records = list(script)
    actions = []
    for i, rec in enumerate(records):
        rec = dict(rec)
        op = rec.pop("op", None)
        if op not in _OP_TYPES:
            raise PlanError(f"record {i}: unknown op {op!r}")
        cls = _OP_TYPES[op]
        if cls is SetQoSClass:
            rec.setdefault("max_iops", None)
        try:
            actions.append(cls(**rec))
        except TypeError as exc:
            raise PlanError(f"record {i} ({op}): {exc}") from exc
    return PolicyPlan(tuple(actions))
