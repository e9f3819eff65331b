"""Experiment runner CLI.

Subcommands: compute, sweep, fit, oracle-check, state-info.  Configuration
comes from a JSON file; flags override config values, config overrides
defaults.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 clustering refusal.  Set ASYMMETRY_KIT_LOG to error|info|debug
for verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .errors import (
    AsymmetryKitError,
    ConfigError,
    DegenerateLeading,
    NonClustering,
)
from .groups import (
    FiniteGroupRep,
    LieGroupRep,
    QuadratureSpec,
    detect_invariant_subalgebra,
    detect_invariant_subgroup,
    generate_group,
    spin_flip_z2,
    su2_rep,
    u1_z_rep,
    y_rotation_group,
    y_rotation_z4_blocked,
    y_rotation_z4_physical,
)
from .moments import (
    asymmetry_finite_group,
    asymmetry_lie_group,
    fit_exponential_to_constant,
    fit_log_slope,
)
from .mps import clustering_check
from .reports import (
    convergence_log_to_csv,
    load_report_csv,
    report_to_csv,
    report_to_json,
    sweep_rows_to_csv,
)
from .states import XxzSpec, catalog, xxz_ground_state

log = logging.getLogger("asymmetry_kit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CLUSTERING = 4

CLUSTERING_REFUSAL_TEXT = (
    "refused: the state's transfer operator has a degenerate leading "
    "eigenvalue, so correlations do not cluster and the universal "
    "group-quotient plateau does not apply; compare against the exact "
    "brute-force oracle instead"
)


def _setup_logging():
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("ASYMMETRY_KIT_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _parse_tols(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"--tol value for {key!r} is not a number") from exc
    return out


def _matrix_from_json(doc) -> np.ndarray:
    arr = np.array(doc, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ConfigError("matrices must be nested [[ [re, im], ... ], ...] rows")
    return arr[..., 0] + 1j * arr[..., 1]


def _build_group(doc: dict, seed: int | None):
    if not isinstance(doc, dict):
        raise ConfigError("'group' must be an object")
    quad_doc = doc.get("quadrature", {})
    quad = QuadratureSpec(
        scheme=quad_doc.get("scheme", "equispaced"),
        nodes=int(quad_doc.get("K", 64)),
        samples=int(quad_doc.get("N", 20000)),
        seed=quad_doc.get("seed", seed),
    )
    if "named" in doc:
        name = doc["named"]
        builders = {
            "y_rotation_order8": y_rotation_group,
            "y_rotation_z4": y_rotation_z4_physical,
            "y_rotation_z4_blocked": y_rotation_z4_blocked,
            "spin_flip_z2": spin_flip_z2,
        }
        if name in builders:
            return builders[name](), name
        if name == "u1_z":
            return u1_z_rep(quadrature=quad), name
        if name == "su2":
            return su2_rep(quadrature=QuadratureSpec("montecarlo", quad.nodes, quad.samples, quad.seed)), name
        raise ConfigError(f"unknown named group {name!r}")
    kind = doc.get("kind")
    if kind == "finite":
        gens = [_matrix_from_json(m) for m in doc.get("generators", [])]
        if not gens:
            raise ConfigError("finite group needs at least one generator")
        return generate_group(gens, max_order=int(doc.get("max_order", 1024))), "finite"
    if kind in ("u1", "su2"):
        gens = [_matrix_from_json(m) for m in doc.get("generators", [])]
        return LieGroupRep(kind, gens, quad), kind
    raise ConfigError("group needs either 'named' or 'kind' in {finite,u1,su2}")


def _build_state(doc: dict, out_dir: Path | None):
    if not isinstance(doc, dict) or "state" not in doc:
        raise ConfigError("'state' must be an object with a 'state' key")
    name = doc["state"]
    if name == "xxz":
        spec = XxzSpec(
            delta=float(doc.get("delta", 2.0)),
            bond_dim_cap=int(doc.get("bond_dim", 32)),
            energy_tol=float(doc.get("energy_tol", 1e-10)),
        )
        result = xxz_ground_state(spec, doc.get("phase_hint", "antiferro"))
        log.info(
            "xxz ground state: delta=%s energy=%.10f truncation=%.2e",
            spec.delta,
            result.energy_density,
            result.truncation_weight,
        )
        if out_dir is not None:
            convergence_log_to_csv(result.convergence_log, out_dir / "xxz_convergence.csv")
        return result.tensor
    params = {k: v for k, v in doc.items() if k != "state"}
    return catalog(name, **params)


def _build_ell_grid(doc) -> list[int]:
    if isinstance(doc, list):
        grid = [int(x) for x in doc]
    elif isinstance(doc, dict):
        start, stop = int(doc["start"]), int(doc["stop"])
        num = int(doc.get("num", 8))
        if doc.get("spacing", "geometric") == "geometric":
            raw = np.geomspace(max(start, 1), stop, num)
        else:
            raw = np.linspace(start, stop, num)
        grid = sorted({int(round(x)) for x in raw})
    else:
        raise ConfigError("'ell' must be a list or {start, stop, num, spacing}")
    if not grid:
        raise ConfigError("'ell' grid is empty")
    return grid


def _fit_report(report, fit_doc):
    model = fit_doc.get("model", "log_slope")
    if model == "log_slope":
        return fit_log_slope(report.ell_grid, report.delta_s, fit_doc.get("window", "last_half"))
    if model == "exponential_to_constant":
        return fit_exponential_to_constant(report.ell_grid, report.delta_s)
    raise ConfigError(f"unknown fit model {model!r}")


def cmd_compute(args) -> int:
    cfg = _load_config(args.config)
    tols = _parse_tols(args.tol)
    out_dir = Path(args.out or cfg.get("out", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    threads = args.threads or int(cfg.get("threads", 1))

    tensor = _build_state(cfg.get("state", {}), out_dir)
    group, group_name = _build_group(cfg.get("group", {}), seed)
    if isinstance(group, LieGroupRep) and group.quadrature.scheme == "montecarlo" and group.quadrature.seed is None:
        raise ConfigError("Monte Carlo integration requires a seed (config 'seed' or --seed)")

    ns = cfg.get("n", [2])
    if isinstance(ns, int):
        ns = [ns]
    ell_grid = _build_ell_grid(cfg.get("ell", [1, 2, 4, 8, 16, 32]))

    from dataclasses import replace

    for n in ns:
        if isinstance(group, FiniteGroupRep):
            report = asymmetry_finite_group(
                tensor,
                group,
                int(n),
                ell_grid,
                term_cap=int(tols.get("term_cap", cfg.get("term_cap", 1_000_000))),
                threads=threads,
                group_descriptor=group_name,
            )
            sub = detect_invariant_subgroup(tensor, group)
            asymptote = float(np.log(group.order / max(sub.order, 1)))
            report = replace(report, meta={**report.meta, "detected_h_order": sub.order})
        else:
            report = asymmetry_lie_group(
                tensor,
                group,
                int(n),
                ell_grid,
                mc_err_cap=tols.get("mc_err_cap", 0.10),
                threads=threads,
                group_descriptor=group_name,
            )
            asymptote = None
        if "fit" in cfg:
            report = replace(report, fit=_fit_report(report, cfg["fit"]))
        base = out_dir / f"report_n{n}"
        report_to_csv(report, base.with_suffix(".csv"))
        report_to_json(report, base.with_suffix(".json"))
        if not args.no_plot:
            try:
                from .plots import render_report

                render_report(report, base.with_suffix(".png"), asymptote)
            except Exception as exc:  # plotting must never fail the run
                log.warning("figure rendering failed: %s", exc)
        print(f"wrote {base}.csv {base}.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    out_dir = Path(args.out or cfg.get("out", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    threads = args.threads or int(cfg.get("threads", 1))

    deltas = cfg.get("deltas", [])
    ns = cfg.get("n", [2])
    if isinstance(ns, int):
        ns = [ns]
    ell_grid = _build_ell_grid(cfg.get("ell", [8, 16, 32, 64, 128, 200]))
    group_doc = cfg.get("group", {"named": "y_rotation_z4_blocked"})
    state_base = dict(cfg.get("state_base", {"state": "xxz"}))

    manifest_path = out_dir / "sweep_manifest.json"
    rows: dict[str, dict] = {}
    if manifest_path.exists():
        rows = json.loads(manifest_path.read_text())
        log.info("resuming sweep with %d completed cells", len(rows))

    def save_manifest():
        tmp = manifest_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(rows, indent=1, sort_keys=True))
        os.replace(tmp, manifest_path)

    for delta in deltas:
        missing = [
            (ell, n)
            for n in ns
            for ell in ell_grid
            if f"{delta}|{ell}|{n}" not in rows
        ]
        if not missing:
            continue
        try:
            state_doc = {**state_base, "delta": delta}
            tensor = _build_state(state_doc, None)
            group, group_name = _build_group(group_doc, seed)
            for n in sorted({n for _, n in missing}):
                ells = sorted({ell for ell, nn in missing if nn == n})
                if isinstance(group, FiniteGroupRep):
                    report = asymmetry_finite_group(
                        tensor, group, int(n), ells, threads=threads, group_descriptor=group_name
                    )
                else:
                    report = asymmetry_lie_group(
                        tensor, group, int(n), ells, threads=threads, group_descriptor=group_name
                    )
                for ell, value in zip(report.ell_grid, report.delta_s):
                    rows[f"{delta}|{ell}|{n}"] = {
                        "delta": float(delta),
                        "ell": int(ell),
                        "n": int(n),
                        "delta_s": float(value),
                        "status": "ok",
                    }
                save_manifest()
        except AsymmetryKitError as exc:
            log.error("sweep cell delta=%s failed: %s", delta, exc)
            for ell, n in missing:
                key = f"{delta}|{ell}|{n}"
                if key not in rows:
                    rows[key] = {
                        "delta": float(delta),
                        "ell": int(ell),
                        "n": int(n),
                        "delta_s": None,
                        "status": f"error:{type(exc).__name__}",
                    }
            save_manifest()
    row_list = list(rows.values())
    sweep_rows_to_csv(row_list, out_dir / "sweep.csv")
    if not args.no_plot:
        try:
            from .plots import render_sweep

            render_sweep(row_list, out_dir / "sweep.png")
        except Exception as exc:
            log.warning("figure rendering failed: %s", exc)
    print(f"wrote {out_dir / 'sweep.csv'} ({len(row_list)} cells)")
    return EXIT_OK


def cmd_fit(args) -> int:
    ells, vals, _ = load_report_csv(args.report)
    if len(ells) < 6:
        raise ConfigError("fit needs at least 6 data points")
    if args.model == "log_slope":
        fit = fit_log_slope(ells, vals, window=args.window)
    else:
        fit = fit_exponential_to_constant(ells, vals)
    print(json.dumps({"model": fit.model, "params": fit.params, "residual_rms": fit.residual_rms}, sort_keys=True))
    return EXIT_OK


def cmd_state_info(args) -> int:
    cfg = _load_config(args.config)
    tensor = _build_state(cfg.get("state", {}), None)
    rep = clustering_check(tensor)
    info = {
        "phys_dim": tensor.phys_dim,
        "bond_dim": tensor.bond_dim,
        "block_size": tensor.block_size,
        "leading_modulus": rep.leading_modulus,
        "gap_ratio": rep.gap_ratio,
        "is_clustering": rep.is_clustering,
        "correlation_length": rep.correlation_length if np.isfinite(rep.correlation_length) else None,
    }
    if "group" in cfg:
        group, group_name = _build_group(cfg["group"], cfg.get("seed"))
        if isinstance(group, FiniteGroupRep):
            sub = detect_invariant_subgroup(tensor, group)
            info["group"] = group_name
            info["group_order"] = group.order
            info["invariant_subgroup_order"] = sub.order
            info["invariant_subgroup_elements"] = sub.indices
            info["phases"] = {str(k): v for k, v in sub.phases.items()}
        else:
            sub = detect_invariant_subalgebra(tensor, group)
            info["group"] = group_name
            info["algebra_dim"] = sub.dim_g
            info["invariant_subalgebra_dim"] = sub.dim_h
    print(json.dumps(info, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    """On-demand cross-validation: transfer-operator pipeline against the
    dense oracle, plus symmetrization-path agreement."""
    from .moments import charged_moment
    from .states import random_tensor

    rng = np.random.default_rng(args.seed)
    failures = 0

    def rand_unitary(d):
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    count, attempt = 0, 0
    chain = args.chain_length
    while count < args.cases:
        attempt += 1
        tensor = random_tensor(1000 * args.seed + attempt, 2 + attempt % 2, 2)
        if clustering_check(tensor).gap_ratio > 0.35:
            continue
        count += 1
        psi = oracle_mod.dense_state(tensor, chain)
        for n in (2, 3):
            ell = 2 + count % 2
            rho = oracle_mod.reduced_density_matrix(psi, ell)
            us = [rand_unitary(2) for _ in range(n - 1)]
            closing = np.eye(2, dtype=complex)
            for u in us:
                closing = closing @ u
            us.append(closing.conj().T)
            ed = oracle_mod.charged_moment_ed(rho, [oracle_mod.site_action(u, ell) for u in us])
            pipe = charged_moment(tensor, us, ell, mode="infinite").value
            ok = abs(ed - pipe) < 1e-6
            failures += 0 if ok else 1
            print(f"moment case {count} n={n}: |ED - pipeline| = {abs(ed - pipe):.2e} "
                  f"{'ok' if ok else 'FAIL'}")

    # symmetrization agreement on a random two-qubit state
    rho = oracle_mod.reduced_density_matrix(oracle_mod.dense_state(random_tensor(9, 3, 2), 12), 2)
    g = spin_flip_z2()
    from .groups import abelian_irrep_projectors

    projs = abelian_irrep_projectors(g, [oracle_mod.site_action(u, 2) for u in g.elements])
    d1 = oracle_mod.symmetrize_exact(rho, g, ell=2)
    d2 = oracle_mod.symmetrize_abelian_blocks(rho, projs)
    diff = float(np.max(np.abs(d1.matrix - d2.matrix)))
    ok = diff < 1e-12
    failures += 0 if ok else 1
    print(f"symmetrization agreement (group average vs character blocks): {diff:.2e} "
          f"{'ok' if ok else 'FAIL'}")
    if failures:
        print(f"{failures} oracle checks FAILED")
        return EXIT_NUMERICAL
    print("all oracle checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asymmetry-kit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="global seed override")
    common.add_argument("--threads", type=int, help="worker threads for group sums")
    common.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="tolerance override, repeatable")
    common.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    pc = sub.add_parser("compute", parents=[common], help="run one asymmetry experiment")
    pc.add_argument("--config", required=True)
    pc.set_defaults(func=cmd_compute)

    ps = sub.add_parser("sweep", parents=[common], help="sweep XXZ anisotropy x subsystem size")
    ps.add_argument("--config", required=True)
    ps.set_defaults(func=cmd_sweep)

    pf = sub.add_parser("fit", help="fit a written report CSV")
    pf.add_argument("--report", required=True)
    pf.add_argument("--model", choices=["log_slope", "exponential_to_constant"],
                    default="log_slope")
    pf.add_argument("--window", choices=["last_half", "all"], default="last_half")
    pf.set_defaults(func=cmd_fit)

    po = sub.add_parser("oracle-check", help="run pipeline-vs-oracle cross checks")
    po.add_argument("--cases", type=int, default=5)
    po.add_argument("--seed", type=int, default=1)
    po.add_argument("--chain-length", type=int, default=16)
    po.set_defaults(func=cmd_oracle_check)

    pi = sub.add_parser("state-info", help="print clustering report and detected symmetry")
    pi.add_argument("--config", required=True)
    pi.set_defaults(func=cmd_state_info)
    return p


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NonClustering, DegenerateLeading) as exc:
        print(f"{CLUSTERING_REFUSAL_TEXT}\ndetail: {exc}", file=sys.stderr)
        return EXIT_CLUSTERING
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AsymmetryKitError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
