"""Serialization of asymmetry reports.

CSV schema is frozen: header row, ell ascending, floats printed with 17
significant digits (full double round trip).  JSON reports carry the whole
report including fit results, group descriptor, seeds, and tolerances, with
sorted keys and no timestamps so repeated runs are byte identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .moments import AsymmetryReport, FitResult


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def report_to_csv(report: AsymmetryReport, path) -> None:
    order = np.argsort(report.ell_grid, kind="stable")
    lines = ["ell,n,delta_s,mc_std_err"]
    for i in order:
        err = report.mc_std_err[i] if report.mc_std_err is not None else None
        lines.append(
            f"{report.ell_grid[i]},{report.n},{_fmt(report.delta_s[i])},{_fmt(err)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _fit_to_dict(fit: FitResult | None):
    if fit is None:
        return None
    return {
        "model": fit.model,
        "params": fit.params,
        "residual_rms": fit.residual_rms,
        "extras": fit.extras,
    }


def report_to_json(report: AsymmetryReport, path) -> None:
    doc = {
        "n": report.n,
        "group": report.group_descriptor,
        "ell": list(report.ell_grid),
        "delta_s": list(report.delta_s),
        "mc_std_err": list(report.mc_std_err) if report.mc_std_err is not None else None,
        "fit": _fit_to_dict(report.fit),
        "meta": report.meta,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_report_csv(path) -> tuple[list[int], list[float], list[float | None]]:
    """(ell, delta_s, mc_std_err) from a frozen-schema CSV."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0].strip() != "ell,n,delta_s,mc_std_err":
        raise ConfigError(f"{path} is not an asymmetry report CSV")
    ells, vals, errs = [], [], []
    for line in text[1:]:
        cells = line.split(",")
        if len(cells) != 4:
            raise ConfigError(f"malformed report row: {line!r}")
        ells.append(int(cells[0]))
        vals.append(float(cells[2]))
        errs.append(float(cells[3]) if cells[3] else None)
    return ells, vals, errs


def sweep_rows_to_csv(rows: list[dict], path) -> None:
    """Aggregated sweep output, one row per (delta, ell, n)."""
    lines = ["delta,ell,n,delta_s,status"]
    for row in sorted(rows, key=lambda r: (r["delta"], r["ell"], r["n"])):
        val = _fmt(row["delta_s"]) if row["delta_s"] is not None else ""
        lines.append(f'{_fmt(row["delta"])},{row["ell"]},{row["n"]},{val},{row["status"]}')
    Path(path).write_text("\n".join(lines) + "\n")


def convergence_log_to_csv(log_rows, path) -> None:
    lines = ["sweep,dtau,energy_density,truncation_weight"]
    for sweep, dtau, energy, trunc in log_rows:
        lines.append(f"{sweep},{_fmt(dtau)},{_fmt(energy)},{_fmt(trunc)}")
    Path(path).write_text("\n".join(lines) + "\n")
