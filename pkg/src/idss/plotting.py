"""Figures for sweep and normalization reports (written to files, Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from idss.cachesim import POLICY_ORDER, SweepReport  # noqa: E402
from idss.control.report import NormalizedReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}
COLORS = dict(zip(POLICY_ORDER, plt.get_cmap("tab10").colors))


def plot_sweeps(sweeps: Mapping[str, SweepReport], chosen: Mapping[str, object] | None,
                path: str | Path) -> Path:
    """Grouped hit-rate bars per trace; the chosen policy's bar is hatched."""
    chosen = chosen or {}
    names = list(sweeps)
    width = 0.8 / len(POLICY_ORDER)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(names), 2.6))
        for j, kind in enumerate(POLICY_ORDER):
            xs = [i + (j - (len(POLICY_ORDER) - 1) / 2) * width for i in range(len(names))]
            hrs = [sweeps[n].hit_rate(kind) for n in names]
            bars = ax.bar(xs, hrs, width, color=COLORS[kind],
                          edgecolor="black", linewidth=0.4)
            for bar, n in zip(bars, names):
                pick = getattr(chosen.get(n), "policy", chosen.get(n))
                if pick is not None and str(pick) == kind.value:
                    bar.set_hatch("////")
        ax.set_xticks(range(len(names)), names)
        ax.set_ylabel("hit rate")
        handles = [Patch(facecolor=COLORS[k], edgecolor="black", linewidth=0.4, label=k.value)
                   for k in POLICY_ORDER]
        handles.append(Patch(facecolor="white", edgecolor="black", hatch="////",
                             label="selected"))
        ax.legend(handles=handles, ncols=4, frameon=False, loc="upper right")
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path


def plot_normalized(report: NormalizedReport, path: str | Path) -> Path:
    """Chosen/best ratio per trace with the geometric mean as a reference line."""
    rows = report.rows
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.2 + 0.5 * max(len(rows), 4), 2.4))
        ax.bar(range(len(rows)), [r.normalized for r in rows],
               color=[COLORS[r.chosen] for r in rows], edgecolor="black", linewidth=0.4)
        ax.axhline(report.geomean, color="black", linestyle="--", linewidth=0.8,
                   label=f"geomean {report.geomean:.3f}")
        ax.set_xticks(range(len(rows)), [r.trace for r in rows], rotation=45, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("chosen / best hit rate")
        ax.legend(frameon=False, loc="lower right")
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path
