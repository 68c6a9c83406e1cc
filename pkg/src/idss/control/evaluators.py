"""Metric functions used to score plans and configurations in CI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from idss.cachesim import capacity_for, simulate
from idss.cachesim.policies import PolicyKind
from idss.policyir.actions import PolicyPlan, SetCachePolicy, SetCacheSize
from idss.trace import AccessTrace, trace_stats

RANDOMIZED = (PolicyKind.LeCaR, PolicyKind.Cacheus)


@dataclass
class CacheSimEvaluator:
    """Scores a plan by simulating its cache settings on a designated trace.

    The plan's SetCachePolicy (and optional SetCacheSize) for ``target``, or
    the first such action when ``target`` is None, chooses the policy and
    size; otherwise ``default_policy`` at ``capacity_frac`` of the working
    set.  The trial number seeds the randomized policies.
    """
    trace: AccessTrace
    capacity_frac: float = 0.001
    block_size: int = 4096
    target: str | None = None
    default_policy: PolicyKind = PolicyKind.LRU
    reentrant: bool = True

    def __post_init__(self):
        self._capacity = capacity_for(trace_stats(self.trace), self.capacity_frac)

    def settings(self, plan: PolicyPlan) -> tuple[PolicyKind, int]:
        policy = capacity = None
        for a in plan:
            if self.target is not None and a.subject != self.target:
                continue
            if isinstance(a, SetCachePolicy) and policy is None:
                policy = a.policy
            elif isinstance(a, SetCacheSize) and capacity is None:
                capacity = max(1, a.bytes // self.block_size)
        return policy or self.default_policy, capacity or self._capacity

    def __call__(self, plan: PolicyPlan, trial: int = 0) -> dict[str, float]:
        policy, capacity = self.settings(plan)
        hp = {"seed": trial} if policy in RANDOMIZED else None
        res = simulate(self.trace, policy, capacity, hp)
        return {"hit_rate": res.hit_rate, "hits": float(res.hits),
                "capacity": float(capacity)}


@dataclass
class CacheConfigObjective:
    """Hit rate of a ``{"policy": ..., "capacity_frac": ...}`` configuration,
    for searching cache parameter spaces."""
    trace: AccessTrace

    def __call__(self, config: Mapping) -> float:
        unique = trace_stats(self.trace).unique_blocks
        cap = capacity_for(unique, float(config.get("capacity_frac", 0.001)))
        return simulate(self.trace, config.get("policy", "LRU"), cap).hit_rate
