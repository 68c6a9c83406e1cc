"""Policy-selection study: sweep every trace, ask the advisor using only a
prefix, and compare the pick against the best policy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from idss.advisor import (
    Advisor,
    AuditLog,
    GenerationSettings,
    Objective,
    PolicyChoice,
    advise_cache_policy,
    build_policy_prompt,
)
from idss.cachesim import POLICY_ORDER, SweepReport, capacity_for, sweep
from idss.control.report import NormalizedReport, normalize_report
from idss.telemetry import extract_profile
from idss.trace import AccessTrace, gen_synthetic, prefix, trace_stats

# Seeds used for the canonical A-D fixtures.
CANONICAL_SEEDS = {"A": 7, "B": 3, "C": 1, "D": 1}
CAPACITY_FRACTION = 0.001
PREFIX_LEN = 400


def canonical_traces() -> dict[str, AccessTrace]:
    return {k: gen_synthetic(k, seed=s) for k, s in CANONICAL_SEEDS.items()}


@dataclass
class StudyResult:
    sweeps: dict[str, SweepReport]
    choices: dict[str, PolicyChoice]
    report: NormalizedReport
    prompts: dict[str, str] = field(default_factory=dict)


def select_policy(trace: AccessTrace, advisor: Advisor, prefix_len: int = PREFIX_LEN,
                  objective: Objective | None = None,
                  settings: GenerationSettings | None = None,
                  audit: AuditLog | None = None) -> tuple[PolicyChoice, str]:
    head = prefix(trace, prefix_len)
    prompt = build_policy_prompt(extract_profile(head), head, POLICY_ORDER, objective)
    return advise_cache_policy(advisor, prompt, settings, audit), prompt


def selection_study(traces: Mapping[str, AccessTrace], advisor: Advisor,
                    fraction: float = CAPACITY_FRACTION, prefix_len: int = PREFIX_LEN,
                    exclude: Sequence[str] = ("FIFO",), parallel: int = 1,
                    audit: AuditLog | None = None) -> StudyResult:
    sweeps, choices, prompts = {}, {}, {}
    for name, tr in traces.items():
        cap = capacity_for(trace_stats(tr), fraction)
        sweeps[name] = sweep(tr, cap, parallel=parallel)
        choices[name], prompts[name] = select_policy(tr, advisor, prefix_len, audit=audit)
    return StudyResult(sweeps, choices, normalize_report(sweeps, choices, exclude), prompts)
