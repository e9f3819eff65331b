"""Figure rendering for asymmetry reports.

Figures are written next to the delimited output; the CSV stays the data
contract and plotting failures must never fail a run (the CLI wraps these
calls).  Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .moments import AsymmetryReport


def render_report(report: AsymmetryReport, path, asymptote: float | None = None) -> None:
    """Delta S_n versus subsystem size, log-x, with optional asymptote."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ells = np.asarray(report.ell_grid)
    vals = np.asarray(report.delta_s)
    order = np.argsort(ells)
    if report.mc_std_err is not None:
        ax.errorbar(
            ells[order],
            vals[order],
            yerr=np.asarray(report.mc_std_err)[order],
            fmt="o-",
            ms=3,
            lw=1,
            capsize=2,
        )
    else:
        ax.plot(ells[order], vals[order], "o-", ms=3, lw=1)
    if asymptote is not None:
        ax.axhline(asymptote, color="gray", ls="--", lw=1, label=f"asymptote {asymptote:.4f}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xscale("log")
    ax.set_xlabel(r"subsystem size $\ell$")
    ax.set_ylabel(rf"$\Delta S_{{{report.n}}}$")
    ax.set_title(f"entanglement asymmetry: {report.group_descriptor}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(rows: list[dict], path) -> None:
    """One curve per sweep parameter value (skips failed cells)."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    deltas = sorted({r["delta"] for r in rows})
    for d in deltas:
        pts = sorted(
            (r["ell"], r["delta_s"])
            for r in rows
            if r["delta"] == d and r["status"] == "ok" and r["delta_s"] is not None
        )
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, lw=1, label=f"$\\Delta$={d}")
    ax.axhline(np.log(4), color="gray", ls="--", lw=1)
    ax.axhline(np.log(2), color="black", ls=":", lw=1)
    ax.set_xscale("log")
    ax.set_xlabel(r"subsystem size $\ell$")
    ax.set_ylabel(r"$\Delta S_n$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
