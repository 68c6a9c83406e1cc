"""Side-by-side comparison of an incumbent plan (A) and a candidate (B)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from idss.policyir.actions import PolicyPlan


@dataclass
class ABResult:
    winner: str | None
    values_a: list[float] = field(default_factory=list)
    values_b: list[float] = field(default_factory=list)
    error: str | None = None

    @property
    def mean_a(self) -> float:
        return math.fsum(self.values_a) / len(self.values_a) if self.values_a else float("nan")

    @property
    def mean_b(self) -> float:
        return math.fsum(self.values_b) / len(self.values_b) if self.values_b else float("nan")


def ab_test(plan_a: PolicyPlan, plan_b: PolicyPlan,
            evaluator: Callable[..., Mapping[str, float] | float],
            trials: int = 1, metric: str = "hit_rate") -> ABResult:
    """Evaluate both plans for ``trials`` seeds; B wins only on a strictly
    higher mean.  Means use exact summation so trial order cannot matter."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    res = ABResult(None)

    def score(plan, t):
        out = evaluator(plan, t)
        return float(out[metric] if isinstance(out, Mapping) else out)

    try:
        for t in range(trials):
            res.values_a.append(score(plan_a, t))
            res.values_b.append(score(plan_b, t))
    except Exception as exc:
        res.error = f"trial {len(res.values_b)}: {type(exc).__name__}: {exc}"
        return res
    res.winner = "B" if res.mean_b > res.mean_a else "A"
    return res
