"""Command-line entry point.

Subcommands: regimes, simulate, transform-check, norms, diagnose, mc-scatter,
gbm-decay, gbm-scaling. Global flags: --config, --seed, --out-dir, --threads.
Exit codes: 0 success, 1 usage, 2 validation, 3 runtime failure (manifest
still written).
"""
from __future__ import annotations

import argparse
import csv
import glob
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, RunManifest, default_config, parse_config
from .experiments import (
    ScatterScenario,
    gbm_decay_experiment,
    gbm_scaling_experiment,
    mc_scattering_curve,
)
from .lp_besov import besov_norm, holder_norm
from .regimes import region_table
from .restriction_norms import SpaceTimeBlock, s_norm, w_norm
from .solver import run_simulation, transform_equivalence_check
from .spectral import read_field, write_field


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="znl", description=__doc__)
    p.add_argument("--version", action="version", version=f"znl {__version__}")
    p.add_argument("--config", help="run config file (INI format)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("ZNL_THREADS", "1")),
        help="ensemble worker pool size",
    )
    sub = p.add_subparsers(dest="command")

    sp = sub.add_parser("regimes", help="regularity-region table as CSV")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--grid-step", type=float, default=1 / 16)
    sp.add_argument("--out", default="regions.csv")

    sub.add_parser("simulate", help="single trajectory from the config file")

    sub.add_parser("transform-check", help="dual-route discrepancy at dt and dt/4")

    sp = sub.add_parser("norms", help="Besov/Hoelder norms of a sampled path CSV")
    sp.add_argument("--input", required=True, help="CSV with columns t,value")
    sp.add_argument("--besov", help="s,p")
    sp.add_argument("--holder", type=float, help="alpha")
    sp.add_argument("--lambda-max", type=float, default=None)

    sp = sub.add_parser("diagnose", help="adapted space-time norms of snapshots")
    sp.add_argument("--input", required=True, help="glob of field snapshot files")
    sp.add_argument("--s-norm", help="s,a,b")
    sp.add_argument("--w-norm", help="l,alpha,beta")
    sp.add_argument("--window", help="t1,t2")

    sp = sub.add_parser("mc-scatter", help="scattering probability vs noise strength")
    sp.add_argument("--c-grid", default="0,1,4,16")
    sp.add_argument("--n-paths", type=int, default=200)

    sp = sub.add_parser("gbm-decay", help="tail Besov-norm exceedance vs c")
    sp.add_argument("--c-grid", default="1,4,16,64")
    sp.add_argument("--s", type=float, default=0.45)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--n-paths", type=int, default=1000)

    sp = sub.add_parser("gbm-scaling", help="Besov scaling-identity KS check")
    sp.add_argument("--c", type=float, default=4.0)
    sp.add_argument("--s", type=float, default=0.45)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--n-paths", type=int, default=2000)

    return p


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _load_config(args) -> RunConfig:
    if args.config:
        return parse_config(args.config)
    return default_config()


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---- subcommand bodies; each returns the manifest outcome dict ----


def _cmd_regimes(args, cfg: RunConfig, out_dir: str) -> dict:
    rows = region_table(args.d, args.grid_step)
    out = os.path.join(out_dir, args.out)
    _write_csv(
        out,
        ["s", "l", "in_lwp", "regime"],
        [(f"{s:.6g}", f"{l:.6g}", int(in_lwp), regime) for s, l, in_lwp, regime in rows],
    )
    return {"rows": len(rows), "csv": out}


def _cmd_simulate(args, cfg: RunConfig, out_dir: str) -> dict:
    grid = cfg.build_grid()
    solver_cfg = cfg.build_solver_config()
    x0, y0 = cfg.build_initial(grid)
    rec = run_simulation(
        grid,
        solver_cfg,
        x0,
        y0,
        args.seed,
        detectors=cfg.build_detectors(),
        store_snapshots_every=cfg["output"]["snapshots_every"],
    )
    prefix = cfg["output"]["prefix"]
    norms_csv = os.path.join(out_dir, f"{prefix}_norms.csv")
    _write_csv(
        norms_csv,
        ["t", "mass", "energy", "Hs_schro", "Hl_wave", "budget", "h_value"],
        [
            (f"{t:.12g}", f"{m:.12g}", f"{e:.12g}", f"{hs:.12g}", f"{hl:.12g}", f"{b:.12g}", f"{h:.12g}")
            for t, m, e, hs, hl, b, h in zip(
                rec.times, rec.mass, rec.energy, rec.hs_schro, rec.hl_wave, rec.budget, rec.h_value
            )
        ],
    )
    for t, (schro, wave) in zip(rec.snapshot_times, rec.snapshots):
        stamp = f"{t:.6f}".replace(".", "p")
        with open(os.path.join(out_dir, f"{prefix}_schro_{stamp}.znlf"), "wb") as fh:
            write_field(fh, schro, grid, t, "schro")
        with open(os.path.join(out_dir, f"{prefix}_wave_{stamp}.znlf"), "wb") as fh:
            write_field(fh, wave, grid, t, "wave")
    return {
        "outcome": rec.outcome,
        "failure_time": rec.failure_time,
        "final_time": rec.times[-1],
        "norms_csv": norms_csv,
        "snapshots": len(rec.snapshots),
    }


def _cmd_transform_check(args, cfg: RunConfig, out_dir: str) -> dict:
    grid = cfg.build_grid()
    solver_cfg = cfg.build_solver_config()
    x0, y0 = cfg.build_initial(grid)
    disc = transform_equivalence_check(grid, solver_cfg, x0, y0, args.seed)
    fine_cfg = cfg.build_solver_config()
    fine_cfg.dt = solver_cfg.dt / 4
    disc_fine = transform_equivalence_check(grid, fine_cfg, x0, y0, args.seed)
    result = {
        "dt": solver_cfg.dt,
        "discrepancy": disc,
        "dt_fine": fine_cfg.dt,
        "discrepancy_fine": disc_fine,
        "ratio": disc / disc_fine if disc_fine > 0 else float("inf"),
    }
    out = os.path.join(out_dir, "transform_check.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    return result


def _cmd_norms(args, cfg: RunConfig, out_dir: str) -> dict:
    times, values = [], []
    with open(args.input, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if len(row) < 2:
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                continue  # header row
            times.append(t)
            values.append(v)
    samples = np.asarray(values)
    dt = times[1] - times[0] if len(times) > 1 else 1.0
    result: dict = {"input": args.input, "n_samples": len(samples)}
    if args.besov:
        s, p = _floats(args.besov)
        est = besov_norm(samples, s, p, lam_max=args.lambda_max, dx=dt)
        result["besov"] = {
            "s": s,
            "p": p,
            "value": est.value,
            "per_scale": [[lam, val] for lam, val in sorted(est.per_scale.items())],
        }
    if args.holder is not None:
        result["holder"] = {
            "alpha": args.holder,
            "value": holder_norm(samples, args.holder, dt=dt),
        }
    out = os.path.join(out_dir, "norms.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    return {"json": out}


def _cmd_diagnose(args, cfg: RunConfig, out_dir: str) -> dict:
    paths = sorted(glob.glob(args.input))
    if len(paths) < 4:
        raise ValueError(f"need at least 4 snapshots, got {len(paths)}")
    fields, grids, times = [], [], []
    for path in paths:
        with open(path, "rb") as fh:
            fld, grid, t, _name = read_field(fh)
        fields.append(fld)
        grids.append(grid)
        times.append(t)
    if any(g != grids[0] for g in grids[1:]):
        raise ValueError("snapshots use different grids")
    order = np.argsort(times)
    times = np.asarray(times)[order]
    fields = [fields[i] for i in order]
    if args.window:
        t1, t2 = _floats(args.window)
        keep = [(i, t) for i, t in enumerate(times) if t1 <= t <= t2]
        fields = [fields[i] for i, _ in keep]
        times = np.asarray([t for _, t in keep])
    dts = np.diff(times)
    if len(dts) == 0 or not np.allclose(dts, dts[0], rtol=1e-6):
        raise ValueError("snapshot times are not uniformly spaced")
    block = SpaceTimeBlock(grids[0], float(dts[0]), np.stack(fields))
    result: dict = {"n_snapshots": len(fields), "dt": float(dts[0])}
    if args.s_norm:
        s, a, b = _floats(args.s_norm)
        rep = s_norm(block, s, a, b)
        result["s_norm"] = {
            "params": [s, a, b],
            "total": rep.total,
            "per_scale": [[lam, val] for lam, val in rep.per_scale],
        }
    if args.w_norm:
        l, alpha, beta = _floats(args.w_norm)
        rep = w_norm(block, l, alpha, beta)
        result["w_norm"] = {
            "params": [l, alpha, beta],
            "total": rep.total,
            "per_scale": [[lam, val] for lam, val in rep.per_scale],
        }
    out = os.path.join(out_dir, "diagnose.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    return {"json": out}


def _make_noise_factory(cfg: RunConfig):
    from .noise import CoeffPreset, NoiseSpec

    k1 = max(1, len(cfg["noise"]["phi1"]) or 2)

    def make(c: float) -> NoiseSpec:
        if c == 0:
            return NoiseSpec(mode="off")
        per = c / np.sqrt(k1)
        phi1 = tuple(CoeffPreset(kind="constant-imag", params={"c": per}) for _ in range(k1))
        return NoiseSpec(mode="nonconservative", phi1=phi1)

    return make


def _cmd_mc_scatter(args, cfg: RunConfig, out_dir: str) -> dict:
    grid = cfg.build_grid()
    x0, y0 = cfg.build_initial(grid)
    det = cfg["detectors"]
    scenario = ScatterScenario(
        grid=grid,
        dt=cfg["time"]["dt"],
        t_max=cfg["time"]["t_max"],
        x0=x0,
        y0=y0,
        make_noise=_make_noise_factory(cfg),
        m_threshold=det["m_threshold"],
        budget_threshold=det["budget_threshold"],
        eps_scat=det["eps_scat"],
        scatter_window=det["scatter_window"],
        scheme=cfg["time"]["scheme"],
        detectors=cfg.build_detectors(),
    )
    res = mc_scattering_curve(
        scenario,
        _floats(args.c_grid),
        args.n_paths,
        args.seed,
        threads=args.threads,
        config_hash=cfg.config_hash,
    )
    out = os.path.join(out_dir, "scatter_curve.csv")
    _write_csv(
        out,
        ["c", "n", "n_scattered", "p_hat", "lo", "hi"],
        [
            (f"{pt.c:.6g}", pt.n, pt.n_scattered, f"{pt.p_hat:.6g}", f"{pt.lo:.6g}", f"{pt.hi:.6g}")
            for pt in res.points
        ],
    )
    return {
        "csv": out,
        "isotonic_residual": res.isotonic_residual,
        "p_hats": {str(pt.c): pt.p_hat for pt in res.points},
        "runtime_s": res.runtime_s,
    }


def _cmd_gbm_decay(args, cfg: RunConfig, out_dir: str) -> dict:
    rows = gbm_decay_experiment(
        _floats(args.c_grid), args.s, args.p, args.n_paths, args.eps, args.seed
    )
    out = os.path.join(out_dir, "gbm_decay.csv")
    _write_csv(
        out,
        ["c", "s", "p", "eps", "p_hat", "lo", "hi"],
        [
            (f"{r.c:.6g}", f"{r.s:.6g}", f"{r.p:.6g}", f"{r.eps:.6g}", f"{r.p_hat:.6g}", f"{r.lo:.6g}", f"{r.hi:.6g}")
            for r in rows
        ],
    )
    return {"csv": out, "p_hats": {str(r.c): r.p_hat for r in rows}}


def _cmd_gbm_scaling(args, cfg: RunConfig, out_dir: str) -> dict:
    result = gbm_scaling_experiment(args.c, args.s, args.p, args.n_paths, args.seed)
    out = os.path.join(out_dir, "gbm_scaling.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    return result


_COMMANDS = {
    "regimes": _cmd_regimes,
    "simulate": _cmd_simulate,
    "transform-check": _cmd_transform_check,
    "norms": _cmd_norms,
    "diagnose": _cmd_diagnose,
    "mc-scatter": _cmd_mc_scatter,
    "gbm-decay": _cmd_gbm_decay,
    "gbm-scaling": _cmd_gbm_scaling,
}

_NEEDS_CONFIG = {"simulate", "transform-check", "mc-scatter"}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"znl: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    if args.command in _NEEDS_CONFIG and not args.config:
        print(f"znl {args.command}: --config is required", file=sys.stderr)
        return 2
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"znl: config: {problem}", file=sys.stderr)
        return 2

    os.makedirs(args.out_dir, exist_ok=True)
    manifest = RunManifest(config_hash=cfg.config_hash, master_seed=args.seed).start()
    manifest_path = os.path.join(args.out_dir, "manifest.json")
    try:
        outcome = _COMMANDS[args.command](args, cfg, args.out_dir)
    except (ValueError, ConfigError, OSError) as exc:
        manifest.finish(status="failed", error=str(exc)).write(manifest_path)
        print(f"znl {args.command}: {exc}", file=sys.stderr)
        return 3
    manifest.finish(status="ok", **_jsonable(outcome)).write(manifest_path)
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def main(argv: list[str] | None = None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
