"""Command-line driver.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 admissibility failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .config import build_model, load_config, omega_grid, segment_indices, validate
from .errors import BlochError, ConfigError, NoAdmissibleTau, NotAdmissible
from .lattice import WaveVectorSplit, build_index_set
from .eigensolvers import check_admissibility
from .sweeps import (
    DEFAULT_SEGMENTS,
    PathSpec,
    convergence_study,
    select_tau,
    sweep_quadratic,
    sweep_standard,
    write_csv,
    write_manifest,
    write_plot_script,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ADMISSIBLE = 0, 2, 3, 4


def _apply_overrides(cfg: dict, args) -> dict:
    if getattr(args, "order", None) is not None:
        cfg["basis"]["order"] = args.order
    if getattr(args, "out", None) is not None:
        cfg["output"]["dir"] = args.out
    if getattr(args, "workers", None) is not None:
        cfg["run"]["workers"] = args.workers
    return cfg


def _solver_kw(cfg: dict) -> dict:
    s = cfg["solver"]
    return {k: s[k] for k in ("res_tol", "diag_tol", "arnoldi_tol", "im_tol", "seed", "max_restarts")}


def _seeds(cfg: dict) -> dict:
    return {"arnoldi_start": cfg["solver"]["seed"], "admissibility_samples": "16^3 cell-centred grid"}


def cmd_bands_standard(cfg: dict) -> int:
    model = build_model(cfg)
    basis = build_index_set(cfg["basis"]["order"])
    path = PathSpec(
        segments=tuple(DEFAULT_SEGMENTS[i] for i in segment_indices(cfg["path"]["segments"])),
        samples=cfg["path"]["samples"],
    )
    nu = cfg["standard"]["freeze_omega_over_2pi"]
    points = sweep_standard(
        model,
        basis,
        path,
        nbands=cfg["standard"]["nbands"],
        grid=cfg["basis"]["grid"],
        freeze_omega=None if nu is None else 2 * math.pi * nu,
        workers=cfg["run"]["workers"],
    )
    out = Path(cfg["output"]["dir"])
    csv_path = write_csv(points, out / "bands_standard.csv")
    write_manifest(out / "manifest_standard.json", cfg, _seeds(cfg), {"rows": len(points)})
    write_plot_script(out / "plot_standard.gp", [csv_path], "standard solver")
    print(f"wrote {len(points)} rows to {csv_path}")
    return EXIT_OK


def _preflight(cfg: dict, model, omegas, segs) -> list[tuple]:
    """(segment name, omega, tau, margin) for every sweep point."""
    rows = []
    for s in segs:
        seg = DEFAULT_SEGMENTS[s]
        for w in omegas:
            tau_cfg = cfg["quadratic"]["tau"]
            if tau_cfg == "auto":
                tau, rep = select_tau(seg.alpha0, seg.alpha_hat, w, model)
            else:
                tau = float(tau_cfg)
                rep = check_admissibility(WaveVectorSplit(seg.alpha0, seg.alpha_hat, tau), w, model)
            rows.append((seg.name, w, tau, rep))
    return rows


def cmd_bands_quadratic(cfg: dict) -> int:
    model = build_model(cfg)
    basis = build_index_set(cfg["basis"]["order"])
    omegas = omega_grid(cfg)
    segs = segment_indices(cfg["quadratic"]["segments"])
    if cfg["solver"]["strict"]:
        bad = [r for r in _preflight(cfg, model, omegas, segs) if not r[3].ok]
        if bad:
            name, w, tau, rep = bad[0]
            raise NotAdmissible(
                f"{len(bad)} sweep points inadmissible, first: segment {name} omega/2pi={w / (2 * math.pi):.6g} "
                f"margin {rep.margin:.4g}"
            )
    points = []
    for s in segs:
        points += sweep_quadratic(
            model,
            basis,
            s,
            omegas,
            tau_policy=cfg["quadratic"]["tau"],
            nev=cfg["quadratic"]["nev"],
            method=cfg["solver"]["method"],
            grid=cfg["basis"]["grid"],
            M=cfg["quadratic"]["M"],
            workers=cfg["run"]["workers"],
            path_margin=cfg["solver"]["path_margin"],
            **_solver_kw(cfg),
        )
    out = Path(cfg["output"]["dir"])
    csv_path = write_csv(points, out / "bands_quadratic.csv")
    failed = sum(p.flag == "failed" for p in points)
    write_manifest(
        out / "manifest_quadratic.json",
        cfg,
        _seeds(cfg),
        {"rows": len(points), "failed_omegas": failed, "shift_policy": "segment midpoint"},
    )
    write_plot_script(out / "plot_quadratic.gp", [csv_path], "quadratic eigenvalue solver")
    print(f"wrote {len(points)} rows to {csv_path} ({failed} failed frequencies)")
    return EXIT_SOLVER if failed and failed == len(omegas) * len(segs) else EXIT_OK


def cmd_converge(cfg: dict) -> int:
    model = build_model(cfg)
    c = cfg["converge"]
    k_ref = [math.pi * v for v in c["k_ref_over_pi"]]
    omega = 2 * math.pi * c["omega_over_2pi"]
    rows = convergence_study(model, k_ref, omega, c["orders"], grid=cfg["basis"]["grid"], nev=c["nev"],
                             method=cfg["solver"]["method"])
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    lines = ["order,dofs,kx,ky,kz,rel_error"]
    print(f"{'order':>5} {'dofs':>7} {'kx':>22} {'rel_error':>12}")
    for r in rows:
        lines.append(",".join([str(r.order), str(r.dofs)] + ["%.17g" % v for v in (*r.k, r.rel_error)]))
        print(f"{r.order:>5} {r.dofs:>7} {r.k[0]:>22.15g} {r.rel_error:>12.4e}")
    (out / "converge.csv").write_text("\n".join(lines) + "\n")
    write_manifest(out / "manifest_converge.json", cfg, _seeds(cfg))
    return EXIT_OK


def cmd_admissible(cfg: dict) -> int:
    model = build_model(cfg)
    rows = _preflight(cfg, model, omega_grid(cfg), segment_indices(cfg["quadratic"]["segments"]))
    print(f"{'segment':>7} {'omega/2pi':>10} {'tau':>10} {'case':>8} {'margin':>12} ok")
    for name, w, tau, rep in rows:
        print(f"{name:>7} {w / (2 * math.pi):>10.5f} {tau:>10.5f} {rep.case_label:>8} {rep.margin:>12.5g} {rep.ok}")
    return EXIT_OK if all(r[3].ok for r in rows) else EXIT_ADMISSIBLE


def cmd_validate(cfg: dict) -> int:
    from .oracles import run_validation

    checks = run_validation(1)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  value={c.value:.3e}  tol={c.tolerance:.0e}")
    verdict = {
        "passed": all(bool(c.passed) for c in checks),
        "checks": [
            {"name": c.name, "passed": bool(c.passed), "value": float(c.value), "tolerance": c.tolerance}
            for c in checks
        ],
    }
    print(json.dumps(verdict, sort_keys=True))
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "validate.json").write_text(json.dumps(verdict, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if verdict["passed"] else EXIT_SOLVER


COMMANDS = {
    "bands-standard": cmd_bands_standard,
    "bands-quadratic": cmd_bands_quadratic,
    "converge": cmd_converge,
    "admissible": cmd_admissible,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandsweep", description="Bloch variety band-structure sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bands-standard": "fix k along the path, solve for omega",
        "bands-quadratic": "fix omega, solve the linearized quadratic problem for k",
        "converge": "k error against basis order at a fixed omega",
        "admissible": "coercivity pre-flight for every sweep point",
        "validate": "run the oracle checks and print a verdict",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("-c", "--config", help="TOML configuration file")
        p.add_argument("--order", type=int, help="override [basis] order")
        p.add_argument("-o", "--out", help="override [output] dir")
        p.add_argument("--workers", type=int, help="override [run] workers")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        validate(cfg)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotAdmissible, NoAdmissibleTau) as exc:
        print(f"admissibility failure: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBLE
    except BlochError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
