"""Greedy-Fine: a Carver-inspired baseline.

Parameters are ranked by one-at-a-time influence around the baseline, then
fixed greedily in that order at their best value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

logger = logging.getLogger(__name__)

EPSILON = 1e-9


@dataclass(frozen=True)
class Param:
    name: str
    domain: tuple

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise ValueError(f"parameter {self.name!r} has an empty domain")


@dataclass(frozen=True)
class ParamSpace:
    params: tuple[Param, ...]
    baseline: Mapping[str, Any]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        for p in self.params:
            if p.name not in self.baseline:
                raise ValueError(f"baseline has no value for {p.name!r}")
            if self.baseline[p.name] not in p.domain:
                raise ValueError(f"baseline {p.name}={self.baseline[p.name]!r} "
                                 f"is outside its domain")

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParamSpace":
        params = tuple(Param(n, tuple(dom)) for n, dom in d["params"].items())
        baseline = d.get("baseline") or {p.name: p.domain[0] for p in params}
        return cls(params, dict(baseline))


@dataclass
class GreedyResult:
    config: dict[str, Any]
    value: float
    evaluations: int
    baseline_value: float | None
    influence: dict[str, float] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)
    exhausted: bool = False
    warning: str | None = None


class _BudgetSpent(Exception):
    pass


def greedy_fine(space: ParamSpace, evaluator: Callable[[Mapping[str, Any]], float],
                budget: int, epsilon: float = EPSILON) -> GreedyResult:
    """Maximise ``evaluator`` over ``space`` with at most ``budget`` calls.

    Repeated configurations are served from a cache and do not count
    against the budget.  The returned value is the best seen, so it is never
    below the baseline's.
    """
    names = [p.name for p in space.params]
    if budget < len(names):
        raise ValueError(f"budget {budget} is below the parameter count {len(names)}")
    seen: dict[tuple, float] = {}
    best: list = [None, float("-inf")]

    def key(cfg):
        return tuple(cfg[n] for n in names)

    def evaluate(cfg: dict) -> float:
        k = key(cfg)
        if k in seen:
            return seen[k]
        if len(seen) >= budget:
            raise _BudgetSpent
        v = float(evaluator(dict(cfg)))
        seen[k] = v
        if v > best[1]:
            best[0], best[1] = dict(cfg), v
        return v

    base = dict(space.baseline)
    influence: dict[str, float] = {}
    order: list[str] = []
    result = GreedyResult(base, float("-inf"), 0, None)
    try:
        result.baseline_value = evaluate(base)
        for p in space.params:
            vals = [evaluate({**base, p.name: v}) for v in p.domain]
            influence[p.name] = max(vals) - min(vals)

        order = sorted(names, key=lambda n: (-influence[n], names.index(n)))
        current, current_val = dict(base), result.baseline_value
        domains = {p.name: p.domain for p in space.params}
        for name in order:
            if influence[name] <= epsilon:
                break
            cands = [({**current, name: v}, evaluate({**current, name: v}))
                     for v in domains[name]]
            cfg, val = max(cands, key=lambda cv: cv[1])
            if val > current_val + epsilon:
                current, current_val = cfg, val
    except _BudgetSpent:
        result.exhausted = True
    except Exception as exc:
        logger.warning("evaluator failed after %d evaluations: %s", len(seen), exc)
        result.warning = f"{type(exc).__name__}: {exc}"

    result.influence, result.order = influence, order
    result.evaluations = len(seen)
    if best[0] is not None:
        result.config, result.value = best[0], best[1]
    return result
