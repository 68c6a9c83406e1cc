"""Cache simulation over access traces: single runs, six-policy sweeps."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

from idss.cachesim.policies import (
    ENGINES,
    POLICY_ORDER,
    Engine,
    HyperparamError,
    PolicyKind,
    make_engine,
)
from idss.trace import AccessTrace, TraceError, TraceStats

__all__ = [
    "PolicyKind", "POLICY_ORDER", "Engine", "HyperparamError", "make_engine",
    "SimResult", "SweepReport", "capacity_for", "simulate", "sweep",
    "best_policy", "sweep_csv",
]


@dataclass(frozen=True)
class SimResult:
    policy: PolicyKind
    capacity: int
    hits: int
    misses: int

    @property
    def hit_rate(self) -> float:
        # Complement of the miss ratio, so cold-miss-only runs give exactly
        # 1 - unique/length.
        return 1.0 - self.misses / (self.hits + self.misses)


@dataclass(frozen=True)
class SweepReport:
    trace: str
    capacity: int
    results: Mapping[PolicyKind, SimResult]

    @property
    def best(self) -> PolicyKind:
        return best_policy(self)[0]

    def hit_rate(self, kind: PolicyKind | str) -> float:
        return self.results[PolicyKind.parse(kind)].hit_rate


def capacity_for(stats: TraceStats | int, fraction: float) -> int:
    """Cache size in blocks as a fraction of the working set, at least 1."""
    unique = stats if isinstance(stats, int) else stats.unique_blocks
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if unique < 1:
        raise ValueError("working set must be non-empty")
    # Round before flooring so 0.001 * 10000 -> 10, not 9.
    return max(1, math.floor(round(fraction * unique, 9)))


def simulate(trace: AccessTrace, kind: PolicyKind | str, capacity: int,
             hyperparams: Mapping | None = None) -> SimResult:
    if not trace.requests:
        raise TraceError("cannot simulate an empty trace")
    kind = PolicyKind.parse(kind)
    engine = make_engine(kind, capacity, **(hyperparams or {}))
    access = engine.access
    hits = 0
    for r in trace.requests:
        if access(r.block):
            hits += 1
    return SimResult(kind, capacity, hits, len(trace) - hits)


def _simulate_args(args):
    return simulate(*args)


def sweep(trace: AccessTrace, capacity: int,
          hyperparams: Mapping[PolicyKind, Mapping] | None = None,
          parallel: int = 1) -> SweepReport:
    hyperparams = hyperparams or {}
    jobs = [(trace, k, capacity, hyperparams.get(k)) for k in POLICY_ORDER]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_simulate_args, jobs))
    else:
        results = [simulate(*j) for j in jobs]
    return SweepReport(trace.label, capacity, {r.policy: r for r in results})


def best_policy(report: SweepReport | Mapping[PolicyKind, float]) -> tuple[PolicyKind, float]:
    """Highest hit rate; ties go to the earliest policy in POLICY_ORDER."""
    if isinstance(report, SweepReport):
        rates = {k: r.hit_rate for k, r in report.results.items()}
    else:
        rates = {PolicyKind.parse(k): v for k, v in report.items()}
    best, best_rate = None, -1.0
    for kind in POLICY_ORDER:
        if kind in rates and rates[kind] > best_rate:
            best, best_rate = kind, rates[kind]
    if best is None:
        raise ValueError("empty sweep report")
    return best, best_rate


def sweep_csv(reports: list[SweepReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trace", "policy", "capacity", "hits", "misses", "hit_rate"])
    for rep in reports:
        for kind in POLICY_ORDER:
            r = rep.results[kind]
            w.writerow([rep.trace, kind.value, r.capacity, r.hits, r.misses,
                        repr(r.hit_rate)])
    return buf.getvalue()
