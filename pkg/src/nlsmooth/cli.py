"""Command-line driver: configure, run, and summarize experiments.

Subcommands: simulate (one trajectory, checkpoints, drift summary),
smoothing (ensemble gain estimate), bounds (multilinear norm sweeps),
infr (normal-form threshold scalings), report (aggregate a run directory
into a pass/warn table).  A TOML config file may set any table; flags
override file keys.  Exit codes: 0 ok, 1 invalid configuration, 2 runtime
failure, 3 acceptance warning (report mode only).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import (ConfigError, config_hash, load_config, merge_overrides,
                     parse_seeds, validate_tables)
from .equations import equation_names, get_equation, predicted_gain
from .evolution import BlowupError, StepperConfig, evolve, physical_field, \
    profile_drift
from .grids import SpectralGrid
from .multilinear import (BoundProbe, FreqLattice, sweep_band_scaling,
                          sweep_gain_feasibility)
from .normalform import InfrConfig, verify_scalings
from .roughdata import RoughDataSpec, generate
from .smoothing import default_data_spec, estimate_gain
from .storage import (StorageExistsError, ensure_writable, read_json,
                      write_csv, write_field, write_json)

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_WARN = 3

OUTPUT_ENV = "NLSMOOTH_OUTPUT"

# Band-sweep exponent ceilings recorded into bounds reports (loss exponents
# are 0+ in theory; the dNLS cubic carries a genuine 1/4 power).
BETA_MAX = 0.65
GAMMA_MAX = {"dnls": 0.35}
GAMMA_MAX_DEFAULT = 0.15


def _values(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v != ""]


def _out_dir(args) -> str:
    root = args.output or os.environ.get(OUTPUT_ENV, "runs")
    os.makedirs(root, exist_ok=True)
    return root


def _stamp(payload: dict, kind: str, digest: str, grid_meta: dict) -> dict:
    payload = dict(payload)
    payload.update({"kind": kind, "config_hash": digest,
                    "version": __version__, "grid": grid_meta})
    return payload


def _fmt_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _write_table(path: str, header, rows, digest: str, grid_meta: dict,
                 force: bool) -> None:
    """CSV with a leading '#' comment carrying hash/version/grid stamps."""
    ensure_writable(path, force)
    meta = ":".join(f"{k}={v}" for k, v in sorted(grid_meta.items()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_hash={digest} version={__version__} {meta}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(x) for x in row) + "\n")


def _base_config(args, kind: str) -> dict:
    cfg = load_config(args.config) if args.config else {}
    cfg = merge_overrides(cfg, {"experiment.kind": kind})
    problems = validate_tables(cfg, kind)
    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems))
    return cfg


def _require_eq(cfg: dict):
    name = cfg.get("equation", {}).get("name")
    if not name:
        raise ConfigError("an equation is required (--eq or [equation] name)")
    return get_equation(name)


def _hash_config(cfg: dict) -> str:
    # Worker count and output location must not change payloads, so they
    # stay outside the hash.
    hashed = {k: v for k, v in cfg.items() if k not in ("output", "run")}
    run = {k: v for k, v in cfg.get("run", {}).items()
           if k not in ("workers",)}
    if run:
        hashed["run"] = run
    return config_hash(hashed)


# --------------------------------------------------------------------------
# simulate


def _cmd_simulate(args) -> int:
    cfg = _base_config(args, "simulate")
    cfg = merge_overrides(cfg, {
        "equation.name": args.eq,
        "equation.s": args.s,
        "grid.n": args.n,
        "grid.length": args.length,
        "data.amplitude": args.amplitude,
        "stepper.dt": args.dt,
        "stepper.t_end": args.t_end,
        "run.seed": args.seed,
        "run.nonlinear": None if args.linear is None else not args.linear,
    })
    eq = _require_eq(cfg)
    s = float(cfg["equation"].get("s", 0.5))
    grid_tbl = cfg.get("grid", {})
    n = int(grid_tbl.get("n", 1024 if eq.dim == 1 else 128))
    length = float(grid_tbl.get("length",
                                8.0 * np.pi if eq.dim == 1 else 4.0 * np.pi))
    grid = SpectralGrid(eq.dim, n, length)
    data_tbl = cfg.get("data", {})
    data = RoughDataSpec(s=s, amplitude=float(data_tbl.get("amplitude", 0.1)),
                         real_symmetric=eq.real_symmetric)
    st_tbl = cfg.get("stepper", {})
    stepper = StepperConfig(dt=float(st_tbl.get("dt", 1e-3)),
                            t_end=float(st_tbl.get("t_end", 1.0)))
    seed = int(cfg.get("run", {}).get("seed", 0))
    nonlinear = bool(cfg.get("run", {}).get("nonlinear", True))
    digest = _hash_config(cfg)
    out = _out_dir(args)
    tag = f"simulate-{eq.name}-{digest}"

    u0 = generate(data, grid, seed)
    traj = evolve(eq, u0, stepper, nonlinear=nonlinear)
    drift = profile_drift(traj)
    sidecar = {"equation": eq.name, "config_hash": digest}
    write_field(os.path.join(out, f"{tag}-t0"), u0,
                sidecar={**sidecar, "t": 0.0}, force=args.force)
    write_field(os.path.join(out, f"{tag}-t1"), physical_field(traj),
                sidecar={**sidecar, "t": stepper.t_end}, force=args.force)
    payload = _stamp({
        "equation": eq.name, "s": s, "seed": seed, "nonlinear": nonlinear,
        "dt": stepper.dt, "t_end": stepper.t_end,
        "profile_drift": drift,
    }, "simulate", digest, grid.meta())
    write_json(os.path.join(out, f"{tag}.json"), payload, force=args.force)
    print(f"{tag}: profile drift {drift:.3e}")
    return EXIT_OK


# --------------------------------------------------------------------------
# smoothing


def _cmd_smoothing(args) -> int:
    cfg = _base_config(args, "smoothing")
    cfg = merge_overrides(cfg, {
        "equation.name": args.eq,
        "equation.s": args.s,
        "grid.n": args.n,
        "grid.length": args.length,
        "data.amplitude": args.amplitude,
        "stepper.dt": args.dt,
        "stepper.t_end": args.t_end,
        "sweep.window": _values(args.window) if args.window else None,
        "run.seeds": args.seeds,
        "run.workers": args.workers,
    })
    eq = _require_eq(cfg)
    if "s" not in cfg["equation"]:
        raise ConfigError("smoothing needs equation.s (--s)")
    s = float(cfg["equation"]["s"])
    grid_tbl = cfg.get("grid", {})
    n = int(grid_tbl.get("n", 4096 if eq.dim == 1 else 256))
    length = float(grid_tbl.get("length",
                                8.0 * np.pi if eq.dim == 1 else 4.0 * np.pi))
    grid = SpectralGrid(eq.dim, n, length)
    st_tbl = cfg.get("stepper", {})
    stepper = StepperConfig(dt=float(st_tbl.get("dt", 1e-3)),
                            t_end=float(st_tbl.get("t_end", 1.0)))
    seeds = parse_seeds(cfg.get("run", {}).get("seeds", "0..8"))
    workers = int(cfg.get("run", {}).get("workers", 1))
    raw_window = cfg.get("sweep", {}).get("window")
    window = None if raw_window is None else \
        (float(raw_window[0]), float(raw_window[1]))

    digest = _hash_config(cfg)
    out = _out_dir(args)
    tag = f"smoothing-{eq.name}-s{s:g}-{digest}"

    data = default_data_spec(eq, s)
    data_tbl = cfg.get("data", {})
    fields = {k: float(v) for k, v in data_tbl.items()
              if k in ("amplitude", "delta_reg", "xi_smoothing",
                       "bump_fraction")}
    if fields:
        data = replace(data, **fields)

    report = estimate_gain(eq, s, grid, stepper, data=data, seeds=seeds,
                           fit_window=window, workers=workers)
    payload = _stamp(report.as_dict(), "smoothing", digest, grid.meta())
    write_json(os.path.join(out, f"{tag}.json"), payload, force=args.force)
    rows = []
    for o in report.outcomes:
        if o.ladder is None:
            continue
        for i, t in enumerate(report.times):
            for j, e in enumerate(report.eps_grid):
                rows.append((o.seed, float(t), float(e),
                             float(o.ladder[i, j])))
    _write_table(os.path.join(out, f"{tag}.csv"),
                 ("seed", "time", "eps", "norm"), rows, digest, grid.meta(),
                 args.force)
    mean = report.eps_hat_mean if report.eps_hats.size else float("nan")
    print(f"{tag}: eps_hat {mean:.3f} (theory {report.eps_theory:.3f}, "
          f"{report.eps_hats.size}/{len(report.outcomes)} seeds)")
    return EXIT_OK


# --------------------------------------------------------------------------
# bounds


def _cmd_bounds(args) -> int:
    cfg = _base_config(args, "bounds")
    aliases = {"alpham": "alphaM", "band": "alphaM",
               "feasibility": "feasibility"}
    kind = None
    if args.kind is not None:
        kind = aliases.get(args.kind.lower().replace("-", ""))
        if kind is None:
            raise ConfigError(f"unknown bounds kind {args.kind!r} "
                              "(expected alphaM or feasibility)")
    cfg = merge_overrides(cfg, {
        "equation.name": args.eq,
        "sweep.kind": kind,
        "sweep.alpha_fixed": args.alpha,
        "sweep.m_fixed": args.m_fixed,
        "sweep.m_values": args.M,
        "sweep.alpha_values": args.alphas,
        "sweep.s_values": args.s_values,
        "sweep.eps_values": args.eps_values,
        "equation.s": args.s,
        "grid.m": args.m_f,
        "grid.extent": args.extent,
        "run.trials": args.trials,
        "run.seed": args.seed,
    })
    eq = _require_eq(cfg)
    sweep = cfg.get("sweep", {})
    kind = sweep.get("kind", "alphaM")
    if kind not in ("alphaM", "feasibility"):
        raise ConfigError(f"unknown bounds kind {kind!r} "
                          "(expected alphaM or feasibility)")
    grid_tbl = cfg.get("grid", {})
    lattice = FreqLattice(int(grid_tbl.get("m", 128)),
                          float(grid_tbl.get("extent", 64.0)), eq.dim)
    trials = int(cfg.get("run", {}).get("trials", 8))
    seed = int(cfg.get("run", {}).get("seed", 0))
    digest = _hash_config(cfg)
    out = _out_dir(args)
    tag = f"bounds-{eq.name}-{kind}-{digest}"
    grid_meta = {"m": lattice.m, "extent": lattice.extent, "dim": lattice.dim}

    if kind == "alphaM":
        s = float(cfg["equation"].get("s", 0.0))
        probe = BoundProbe(eq, s=s, eps=0.0, lattice=lattice, trials=trials,
                           seed=seed)
        m_values = [float(v) for v in
                    sweep.get("m_values", (1, 2, 4, 8, 16, 32, 64))]
        a_values = [float(v) for v in
                    sweep.get("alpha_values", (0, 1, 2, 4, 8, 16, 32, 64))]
        alpha_fixed = float(sweep.get("alpha_fixed", 0.0))
        m_fixed = float(sweep.get("m_fixed", 4.0))
        rep = sweep_band_scaling(probe, m_values, a_values,
                                 alpha_fixed=alpha_fixed, m_fixed=m_fixed)
        gamma_max = GAMMA_MAX.get(eq.name, GAMMA_MAX_DEFAULT)
        payload = _stamp({
            "equation": eq.name, "s": s, "alpha_fixed": rep.alpha_fixed,
            "m_fixed": rep.m_fixed,
            "m_values": list(rep.m_values), "m_lowers": list(rep.m_lowers),
            "m_uppers": list(rep.m_uppers),
            "alpha_values": list(rep.alpha_values),
            "alpha_lowers": list(rep.alpha_lowers),
            "alpha_uppers": list(rep.alpha_uppers),
            "beta_fit": rep.beta_fit.as_dict(),
            "gamma_fit": rep.gamma_fit.as_dict(),
            "beta_max": BETA_MAX, "gamma_max": gamma_max,
        }, "bounds-alphaM", digest, grid_meta)
        rows = [("M", m, lo, up, rep.beta_fit.slope)
                for m, lo, up in zip(rep.m_values, rep.m_lowers, rep.m_uppers)]
        rows += [("alpha", a, lo, up, rep.gamma_fit.slope)
                 for a, lo, up in zip(rep.alpha_values, rep.alpha_lowers,
                                      rep.alpha_uppers)]
        header = ("axis", "value", "lower", "upper", "fit_slope")
        print(f"{tag}: beta_hat {rep.beta_fit.slope:.3f} "
              f"gamma_hat {rep.gamma_fit.slope:.3f}")
    else:
        s_default = (0.0, 0.1, 0.2, 0.3)
        e_default = (0.1, 0.3, 0.6, 0.9)
        s_values = [float(v) for v in sweep.get("s_values", s_default)]
        eps_values = [float(v) for v in sweep.get("eps_values", e_default)]
        probe = BoundProbe(eq, s=0.0, eps=0.0, lattice=lattice, trials=trials,
                           seed=seed)
        rep = sweep_gain_feasibility(probe, s_values, eps_values)
        payload = _stamp({
            "equation": eq.name,
            "growth_threshold": rep.growth_threshold,
            "cells": [{
                "s": c.s, "eps": c.eps, "sigma": c.sigma,
                "eps_theory": predicted_gain(eq, c.s),
                "lower_base": c.lower_base,
                "lower_refined": c.lower_refined,
                "upper_base": c.upper_base,
                "growth": c.growth, "bounded": c.bounded,
            } for c in rep.cells],
        }, "bounds-feasibility", digest, grid_meta)
        rows = [(c.s, c.eps, c.sigma, c.lower_base, c.lower_refined,
                 c.upper_base, c.growth, c.bounded) for c in rep.cells]
        header = ("s", "eps", "sigma", "lower", "lower_refined", "upper",
                  "growth", "bounded")
        n_bounded = sum(c.bounded for c in rep.cells)
        print(f"{tag}: {n_bounded}/{len(rep.cells)} cells bounded")

    write_json(os.path.join(out, f"{tag}.json"), payload, force=args.force)
    _write_table(os.path.join(out, f"{tag}.csv"), header, rows, digest,
                 grid_meta, args.force)
    return EXIT_OK


# --------------------------------------------------------------------------
# infr


def _cmd_infr(args) -> int:
    cfg = _base_config(args, "infr")
    cfg = merge_overrides(cfg, {
        "equation.name": args.eq,
        "equation.s": args.s,
        "sweep.sigma": args.sigma,
        "sweep.eps": args.eps,
        "sweep.n_values": args.N,
        "sweep.j_max": args.j_max,
        "grid.m": args.m_f,
        "grid.extent": args.extent,
        "run.ensemble": args.ensemble,
        "run.seed": args.seed,
    })
    eq = _require_eq(cfg)
    if "s" not in cfg["equation"]:
        raise ConfigError("infr needs equation.s (--s)")
    s = float(cfg["equation"]["s"])
    sweep = cfg.get("sweep", {})
    sigma = float(sweep.get("sigma", 0.6))
    eps = float(sweep.get("eps", sigma))
    n_values = tuple(float(v) for v in
                     sweep.get("n_values", (16, 32, 64, 128, 256, 512, 1024)))
    j_max = int(sweep.get("j_max", 1))
    grid_tbl = cfg.get("grid", {})
    lattice_args = {}
    if "m" in grid_tbl or "extent" in grid_tbl:
        lattice_args["lattice"] = FreqLattice(
            int(grid_tbl.get("m", 256)), float(grid_tbl.get("extent", 1024.0)),
            eq.dim)
    icfg = InfrConfig(eq, s=s, eps=eps, sigma=sigma, n_values=n_values,
                      j_max=j_max,
                      ensemble=int(cfg.get("run", {}).get("ensemble", 4)),
                      seed=int(cfg.get("run", {}).get("seed", 0)),
                      **lattice_args)
    digest = _hash_config(cfg)
    out = _out_dir(args)
    tag = f"infr-{eq.name}-s{s:g}-{digest}"
    grid_meta = {"m": icfg.lattice.m, "extent": icfg.lattice.extent,
                 "dim": icfg.lattice.dim}

    rep = verify_scalings(icfg)
    payload = _stamp({
        "equation": rep.equation, "s": rep.s, "eps": rep.eps,
        "sigma": rep.sigma, "n_values": list(rep.n_values),
        "near_norms": list(rep.near_norms),
        "far_norms": list(rep.far_norms),
        "boundary_norms": list(rep.boundary_norms),
        "near_fit": rep.near_fit.as_dict(),
        "boundary_fit": rep.boundary_fit.as_dict(),
        "partition_residual": rep.partition_residual,
        "theory_near": rep.theory_near,
        "theory_boundary": rep.theory_boundary,
        "j2_boundary_norms": (None if rep.j2_boundary_norms is None
                              else list(rep.j2_boundary_norms)),
        "j2_boundary_fit": (None if rep.j2_boundary_fit is None
                            else rep.j2_boundary_fit.as_dict()),
        "theory_j2_boundary": rep.theory_j2_boundary,
    }, "infr", digest, grid_meta)
    write_json(os.path.join(out, f"{tag}.json"), payload, force=args.force)
    rows = []
    terms = [("near", rep.near_norms, rep.near_fit.slope),
             ("far", rep.far_norms, None),
             ("boundary", rep.boundary_norms, rep.boundary_fit.slope)]
    if rep.j2_boundary_norms is not None:
        terms.append(("j2_boundary", rep.j2_boundary_norms,
                      rep.j2_boundary_fit.slope))
    for name, norms, fit_slope in terms:
        for n_thr, norm in zip(rep.n_values, norms):
            rows.append((n_thr, name, norm,
                         "" if fit_slope is None else fit_slope))
    _write_table(os.path.join(out, f"{tag}.csv"),
                 ("N", "term", "norm", "fit_slope"), rows, digest, grid_meta,
                 args.force)
    print(f"{tag}: boundary slope {rep.boundary_fit.slope:.3f} "
          f"(theory {rep.theory_boundary:.3f}), near slope "
          f"{rep.near_fit.slope:.3f} (cap {rep.theory_near + 0.15:.3f})")
    return EXIT_OK


# --------------------------------------------------------------------------
# report


def _judge(payload: dict) -> tuple[str, str]:
    """Return (status, detail) for one report document."""
    kind = payload.get("kind", "?")
    if kind == "simulate":
        drift = payload.get("profile_drift")
        if not payload.get("nonlinear", True):
            ok = drift is not None and drift < 1e-12
            return ("pass" if ok else "warn",
                    f"linear profile drift {drift:.3e}")
        return "pass", f"profile drift {drift:.3e}"
    if kind == "smoothing":
        theory = payload["eps_theory"]
        measured = payload.get("eps_hat_mean")
        if measured is None:
            return "warn", "no usable seeds"
        ok = measured >= (2.0 / 3.0) * theory
        return ("pass" if ok else "warn",
                f"eps_hat {measured:.3f} vs 2/3 * {theory:.3f}")
    if kind == "bounds-alphaM":
        beta = payload["beta_fit"]["slope"]
        gamma = payload["gamma_fit"]["slope"]
        ok = beta <= payload["beta_max"] and gamma <= payload["gamma_max"]
        return ("pass" if ok else "warn",
                f"beta_hat {beta:.3f}<=?{payload['beta_max']}, "
                f"gamma_hat {gamma:.3f}<=?{payload['gamma_max']}")
    if kind == "bounds-feasibility":
        bad = []
        for c in payload["cells"]:
            th = c["eps_theory"]
            if c["eps"] < th and not c["bounded"]:
                bad.append(f"(s={c['s']},eps={c['eps']}) should be bounded")
            if c["eps"] >= th + 0.3 and c["bounded"]:
                bad.append(f"(s={c['s']},eps={c['eps']}) should grow")
        return ("pass" if not bad else "warn",
                "; ".join(bad) or "all cells classified as predicted")
    if kind == "infr":
        b = payload["boundary_fit"]["slope"]
        nr = payload["near_fit"]["slope"]
        ok = (abs(b - payload["theory_boundary"]) <= 0.15
              and nr <= payload["theory_near"] + 0.15)
        return ("pass" if ok else "warn",
                f"boundary {b:.3f} (theory {payload['theory_boundary']:.2f}),"
                f" near {nr:.3f} (cap {payload['theory_near'] + 0.15:.2f})")
    return "warn", f"unknown report kind {kind!r}"


def _cmd_report(args) -> int:
    directory = args.directory
    if not os.path.isdir(directory):
        raise ConfigError(f"{directory} is not a directory")
    docs = []
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".json"):
            continue
        payload = read_json(os.path.join(directory, name))
        if "kind" in payload and "config_hash" in payload:
            docs.append((name, payload))
    docs = [(n, p) for n, p in docs
            if p["kind"] in ("simulate", "smoothing", "bounds-alphaM",
                             "bounds-feasibility", "infr")]
    if not docs:
        raise ConfigError("no reports found")
    rows = []
    any_warn = False
    for name, payload in docs:
        status, detail = _judge(payload)
        any_warn = any_warn or status == "warn"
        eq = payload.get("equation", "-")
        rows.append((name, payload["kind"], eq, status, detail))
        print(f"{status:4s}  {payload['kind']:18s} {eq:5s} {detail}")
    if args.csv:
        write_csv(args.csv, ("file", "kind", "equation", "status", "detail"),
                  rows, force=args.force)
    return EXIT_WARN if any_warn else EXIT_OK


# --------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} "
                                    "or ./runs)")
    p.add_argument("--force", action="store_true",
                   help="overwrite existing outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlsmooth",
        description="Spectral experiments on nonlinear smoothing of "
                    "dispersive PDE.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve one trajectory")
    _add_common(p)
    p.add_argument("--eq", choices=equation_names())
    p.add_argument("--s", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--length", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--linear", action="store_const", const=True, default=None,
                   help="disable the nonlinearity")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("smoothing", help="ensemble smoothing-gain estimate")
    _add_common(p)
    p.add_argument("--eq", choices=equation_names())
    p.add_argument("--s", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--length", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--seeds", help="e.g. 0..8 or 0,2,5")
    p.add_argument("--window", help="fit window, e.g. 2.0,32.5")
    p.add_argument("--workers", type=int)
    p.set_defaults(handler=_cmd_smoothing)

    p = sub.add_parser("bounds", help="multilinear norm sweeps")
    _add_common(p)
    p.add_argument("--eq", choices=equation_names())
    p.add_argument("--kind", help="alphaM (band scaling) or feasibility")
    p.add_argument("--s", type=float)
    p.add_argument("--alpha", type=float, help="fixed alpha for the M sweep")
    p.add_argument("--M", help="comma list of M values")
    p.add_argument("--alphas", help="comma list for the alpha sweep")
    p.add_argument("--m-fixed", type=float, help="fixed M for the alpha sweep")
    p.add_argument("--s-values", help="comma list (feasibility)")
    p.add_argument("--eps-values", help="comma list (feasibility)")
    p.add_argument("--m-f", type=int, dest="m_f", help="lattice points per axis")
    p.add_argument("--extent", type=float, help="lattice half-width")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_bounds)

    p = sub.add_parser("infr", help="normal-form threshold scalings")
    _add_common(p)
    p.add_argument("--eq", choices=equation_names())
    p.add_argument("--s", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--N", help="comma list of thresholds")
    p.add_argument("--j-max", type=int, dest="j_max")
    p.add_argument("--m-f", type=int, dest="m_f")
    p.add_argument("--extent", type=float)
    p.add_argument("--ensemble", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_infr)

    p = sub.add_parser("report", help="aggregate a run directory")
    p.add_argument("directory")
    p.add_argument("--csv", help="also write the summary table here")
    p.add_argument("--force", action="store_true")
    p.set_defaults(handler=_cmd_report)
    return parser


def _parse_list_args(args) -> None:
    for attr in ("M", "alphas", "s_values", "eps_values", "N"):
        if getattr(args, attr, None) is not None:
            setattr(args, attr, _values(getattr(args, attr)))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _parse_list_args(args)
        return args.handler(args)
    except (ConfigError, StorageExistsError, ValueError, KeyError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BlowupError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
