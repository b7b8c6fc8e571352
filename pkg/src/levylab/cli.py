"""Command line entry point: ``levylab {expfn,gauss,path,run,list-suites}``.

CSV goes to stdout (or ``--out``); timings and progress go to stderr so that
stdout and report files stay byte-identical across reruns.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import exponent as ex
from . import gaussian as gs
from . import pathlab as pl
from .stats import wilson_interval
from .config import ConfigError, ExperimentConfig, load_experiment, load_model, resolve_seed
from .suites import SUITES, SuiteContext, run_suite

__all__ = ["main", "build_parser"]


def _writer(path):
    fh = open(path, "w", newline="") if path else sys.stdout
    return fh, csv.writer(fh, lineterminator="\n")


def _f(v) -> str:
    return repr(float(v))


# -- expfn ---------------------------------------------------------------------------

def cmd_expfn(args) -> int:
    model = load_model(args.model)
    lo, hi = -args.grid_decades, args.grid_decades
    table = ex.build_table(model, 10.0 ** lo, 10.0 ** hi, args.per_decade, args.tol)
    vt = ex.build_variogram(table, 10.0 ** lo, 10.0 ** hi, args.per_decade, args.tol)
    fh, w = _writer(args.out)
    w.writerow(["lambda", "psi", "pi"])
    for r in zip(table.lam, table.psi_vals, table.pi_vals):
        w.writerow(map(_f, r))
    fh.write("\n")
    w.writerow(["x", "sigma0_sq", "sigma0_hat_sq", "phi", "H"])
    for r in zip(vt.x, vt.sigma0_sq, vt.sigma0_hat_sq, vt.phi, vt.H):
        w.writerow(map(_f, r))
    if args.out:
        fh.close()
    return 0


# -- gauss ---------------------------------------------------------------------------

def cmd_gauss(args) -> int:
    seed = resolve_seed(args.seed)
    vt = ex.build_variogram(load_model(args.field_model))
    half = args.half_width
    fld = gs.make_field(vt, gs.uniform_sites(half, half / args.grid), seed)
    rows = []
    if args.probe == "maxloc":
        P = gs.sample(fld, args.paths, seed, tag=11)
        tau, _ = gs.leftmost_argmax(P, fld.sites, 0.0, half)
        cnt, edges = np.histogram(tau, bins=args.bins, range=(0.0, half))
        wid = half / args.bins
        for a, b, c in zip(edges[:-1], edges[1:], cnt):
            lo, hi = wilson_interval(int(c), args.paths)
            tm = 0.5 * (a + b)
            rows.append((tm, c / (args.paths * wid), lo / wid, hi / wid, max(1 / tm, 1 / (half - tm))))
    elif args.probe == "upper":
        shat = math.sqrt(ex.sigma0_hat_sq(vt, half))
        u = shat * np.linspace(0.0, 6.0, 25)
        est, _, _ = gs.upper_tail_probe(fld, half, u, args.paths, seed)
        rows = [(e.param, e.estimate, e.ci_lo, e.ci_hi, 3.0 * math.exp(-e.param ** 2 / (18 * shat ** 2)))
                for e in est]
    elif args.probe == "lower":
        hs = 2.0 ** -np.arange(1, 7)
        est = gs.lower_tail_probe(fld, hs, [half], args.paths, seed)[0]
        rows = [(e.param, e.estimate, e.ci_lo, e.ci_hi, math.nan) for e in est]
    else:  # cm
        a = 1.0
        for h in (0.5, 0.25, 0.125):
            sh = gs.RkhsShift(h, a)
            r = gs.cameron_martin_check(fld, sh.centered(fld.sites), math.sqrt(half), args.paths, seed,
                                        gs.rkhs_norm(vt, sh))
            rows.append((h, r.lhs, r.lhs - 1.96 * r.lhs_se, r.lhs + 1.96 * r.lhs_se, r.rhs))
    fh, w = _writer(args.out)
    w.writerow(["param", "estimate", "ci_lo", "ci_hi", "bound"])
    for r in rows:
        w.writerow(map(_f, r))
    if args.out:
        fh.close()
    return 0


# -- path ----------------------------------------------------------------------------

def cmd_path(args) -> int:
    seed = resolve_seed(args.seed)
    model = load_model(args.model)
    vt = ex.build_variogram(model)
    tg = [args.horizon * 2.0 ** -k for k in range(args.levels)]
    if args.stat == "polarity":
        r = pl.polarity_ratio_check(vt)
        fh, w = _writer(args.out)
        w.writerow(["k", "weighted_sup"])
        for k, v in zip(r.k, r.weighted_sup):
            w.writerow([int(k), _f(v)])
        if args.out:
            fh.close()
        return 0 if r.monotone else 1
    if args.stat == "rayknight":
        sites = args.bins * np.array([0.25, 0.5])
        spec = pl.rayknight_spec(model, args.horizon, sites)
        if args.dt:
            spec = pl.WalkSpec(spec.width, spec.half_bins, args.dt, spec.accel_window,
                               stop_level=args.horizon, eps_jump=args.eps_jump)
        r = pl.verify_rayknight(model, args.horizon, sites, args.paths, seed, vt, spec)
        fh, w = _writer(args.out)
        w.writerow(["x", "ks", "mean_L", "mean_L_se", "censored_fraction"])
        for x, k, m, s in zip(r.sites, r.ks, r.mean_L, r.mean_L_se):
            w.writerow([_f(x), _f(k), _f(m), _f(s), _f(r.censored_fraction)])
        if args.out:
            fh.close()
        return 0 if r.passed() else 1
    if args.stat == "upper":
        series = pl.upper_statistic(model, 3.0, tg, args.paths, 1.0, seed, vt)
    elif args.stat == "lower":
        series = pl.lower_statistic(model, 2.0, tg, args.paths, seed, vt)
    else:
        series = pl.favorite_ratio(model, 3.0, tg, args.paths, seed, vt)
    fh, w = _writer(args.out)
    w.writerow(["t", "statistic", "median", "q10", "q90", "n_censored"])
    for s in series:
        w.writerow([_f(s.t), args.stat, _f(s.median), _f(s.q10), _f(s.q90), s.n_censored])
    if args.out:
        fh.close()
    return 0


# -- run / list-suites -----------------------------------------------------------------

def _run_one(job):
    name, model, seed, params, tol, out, svg = job
    t0 = time.perf_counter()
    rep = run_suite(name, SuiteContext(model, seed, params, tol))
    rep.write(out, svg)
    return name, rep.model, rep.passed, rep.error, time.perf_counter() - t0


def _expand(names: list[str]) -> list[str]:
    out: list[str] = []
    for n in names:
        if n == "all":
            out += [s for s in SUITES if s not in out]
        elif n not in SUITES:
            raise ConfigError(f"unknown suite {n!r}; see 'levylab list-suites'")
        elif n not in out:
            out.append(n)
    return out


def cmd_run(args) -> int:
    if args.config:
        cfg = load_experiment(args.config, args.seed)
        if args.suite:
            cfg.suites = args.suite
        if args.model:
            cfg.model = args.model
    else:
        cfg = ExperimentConfig(args.suite or [], args.model or "stable15", resolve_seed(args.seed))
    if args.out:
        cfg.out_dir = args.out
    if args.jobs:
        cfg.jobs = args.jobs
    cfg.svg = cfg.svg or args.svg
    load_model(cfg.model)
    names = _expand(cfg.suites)
    jobs = [(n, cfg.model, cfg.seed, cfg.params.get(n, {}), cfg.tolerances, cfg.out_dir, cfg.svg)
            for n in names]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    summary = {"seed": cfg.seed, "model": cfg.model,
               "suites": [{"suite": n, "model": m, "passed": ok, "error": err}
                          for n, m, ok, err, _ in results]}
    summary["passed"] = all(s["passed"] for s in summary["suites"])
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    (Path(cfg.out_dir) / f"summary_{cfg.model}_seed{cfg.seed}.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for n, m, ok, err, dt in results:
        print(f"{'PASS' if ok else 'FAIL'} {n} [{m}]" + (f" error: {err}" if err else ""))
        print(f"{n}: {dt:.2f}s", file=sys.stderr)
    return 0 if summary["passed"] else 1


def cmd_list(args) -> int:
    for s in SUITES.values():
        extra = f" (model fixed: {s.fixed_model})" if s.fixed_model else ""
        print(f"{s.name}\t{s.anchor}{extra}\n\tops: {', '.join(s.ops)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levylab", description="Numerical checks for local times of "
                                "symmetric Levy processes and their associated Gaussian processes.")
    sub = p.add_subparsers(dest="cmd", required=True)

    e = sub.add_parser("expfn", help="tabulate psi, pi and the variogram functions")
    e.add_argument("--model", default="stable15", help="built-in name or TOML file")
    e.add_argument("--tol", type=float, default=1e-8)
    e.add_argument("--grid-decades", type=float, default=6.0, help="grid spans 10^-d .. 10^d")
    e.add_argument("--per-decade", type=int, default=64)
    e.add_argument("--out")
    e.set_defaults(fn=cmd_expfn)

    g = sub.add_parser("gauss", help="Monte Carlo probes of the associated Gaussian process")
    g.add_argument("--field-model", default="stable15")
    g.add_argument("--grid", type=int, default=200, help="sites per unit half-width")
    g.add_argument("--half-width", type=float, default=1.0)
    g.add_argument("--paths", type=int, default=10000)
    g.add_argument("--probe", choices=["maxloc", "upper", "lower", "cm"], default="maxloc")
    g.add_argument("--bins", type=int, default=20)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gauss)

    q = sub.add_parser("path", help="path ensembles and local time statistics")
    q.add_argument("--model", default="stable15")
    q.add_argument("--horizon", type=float, default=0.5, help="t level (largest level for trends)")
    q.add_argument("--levels", type=int, default=3, help="number of dyadic levels below --horizon")
    q.add_argument("--eps-jump", type=float, default=1e-3)
    q.add_argument("--dt", type=float)
    q.add_argument("--bins", type=float, default=1.0, help="site scale for rayknight")
    q.add_argument("--paths", type=int, default=2000)
    q.add_argument("--stat", choices=["rayknight", "upper", "lower", "favorite", "polarity"],
                   default="rayknight")
    q.add_argument("--seed", type=int)
    q.add_argument("--out")
    q.set_defaults(fn=cmd_path)

    r = sub.add_parser("run", help="run named suites and write reports")
    r.add_argument("--suite", action="append", help="suite name, repeatable; 'all' for every suite")
    r.add_argument("--model")
    r.add_argument("--config", help="experiment TOML file")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--jobs", type=int)
    r.add_argument("--svg", action="store_true")
    r.set_defaults(fn=cmd_run)

    sub.add_parser("list-suites", help="print the suite catalog").set_defaults(fn=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, RuntimeError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
