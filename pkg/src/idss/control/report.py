"""Chosen-vs-best hit-rate normalization across traces."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from idss.cachesim import POLICY_ORDER, SweepReport, best_policy
from idss.cachesim.policies import PolicyKind


class ReportError(KeyError):
    pass


@dataclass(frozen=True)
class NormalizedRow:
    trace: str
    chosen: PolicyKind
    best: PolicyKind
    chosen_hr: float
    best_hr: float
    normalized: float
    worst: PolicyKind | None = None
    worst_hr: float | None = None

    @property
    def vs_worst(self) -> float | None:
        if not self.worst_hr:
            return None
        return self.chosen_hr / self.worst_hr


@dataclass
class NormalizedReport:
    rows: list[NormalizedRow]
    excluded: tuple[str, ...] = ()
    histogram: dict[str, int] = field(default_factory=dict)

    @property
    def geomean(self) -> float:
        return geometric_mean(r.normalized for r in self.rows)

    @property
    def vs_worst_geomean(self) -> float | None:
        ratios = [r.vs_worst for r in self.rows if r.vs_worst is not None]
        return geometric_mean(ratios) if ratios else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trace", "chosen", "best", "chosen_hr", "best_hr", "normalized"])
        for r in self.rows:
            w.writerow([r.trace, r.chosen.value, r.best.value, repr(r.chosen_hr),
                        repr(r.best_hr), repr(r.normalized)])
        vw = self.vs_worst_geomean
        buf.write(f"# geomean={self.geomean:.6f}"
                  + (f" vs_worst_geomean={vw:.6f}" if vw is not None else "")
                  + (f" excluded={','.join(self.excluded)}" if self.excluded else "")
                  + "\n")
        return buf.getvalue()


def geometric_mean(values: Iterable[float]) -> float:
    vals = list(values)
    if not vals:
        raise ValueError("geometric mean of no values")
    if any(v <= 0 for v in vals):
        return 0.0
    return math.exp(math.fsum(math.log(v) for v in vals) / len(vals))


def normalize_report(sweeps: Mapping[str, SweepReport],
                     choices: Mapping[str, PolicyKind | str | object],
                     exclude: Iterable[str] = ()) -> NormalizedReport:
    """Per trace, the chosen policy's hit rate over the best one's.

    When every policy scores 0 the choice counts as 1.0 (nothing better was
    available).  ``exclude`` removes policies from the worst-policy
    comparison only.
    """
    excluded = tuple(PolicyKind.parse(e).value for e in exclude)
    rows = []
    for trace, choice in choices.items():
        if trace not in sweeps:
            raise ReportError(f"no sweep for trace {trace!r}")
        rep = sweeps[trace]
        chosen = PolicyKind.parse(getattr(choice, "policy", choice))
        best, best_hr = best_policy(rep)
        chosen_hr = rep.hit_rate(chosen)
        norm = 1.0 if best_hr == 0 else chosen_hr / best_hr
        pool = [k for k in POLICY_ORDER if k.value not in excluded and k in rep.results]
        worst = min(pool, key=lambda k: (rep.hit_rate(k), -POLICY_ORDER.index(k))) if pool else None
        rows.append(NormalizedRow(trace, chosen, best, chosen_hr, best_hr, norm, worst,
                                  rep.hit_rate(worst) if worst else None))
    hist = Counter(r.chosen.value for r in rows)
    return NormalizedReport(rows, excluded, {k.value: hist.get(k.value, 0) for k in POLICY_ORDER})
