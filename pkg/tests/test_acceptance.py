"""Acceptance criteria 1-10, each at its stated tolerance and sample size.

One pass/fail line per criterion is printed in the terminal summary.
"""
from __future__ import annotations

import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from levylab import exponent as ex
from levylab import measure as ms
from levylab.cli import main
from levylab.suites import SuiteContext, run_suite


def _record(n: int, ok: bool, detail: str, elapsed: float, limit: float) -> None:
    ok = bool(ok and elapsed < limit)
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f}s / limit {limit:.0f}s]"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def _run(name, model="stable15", seed=0, **params):
    rep = run_suite(name, SuiteContext(model, seed, params))
    assert rep.error is None, rep.error
    return rep


def _by_name(rep):
    return {r.name: r for r in rep.records}


def test_criterion_01_exponent_oracle():
    t0 = time.perf_counter()
    m = ms.stable(1.5)
    et = ex.build_table(m)
    sel = (et.lam >= 1e-2) & (et.lam <= 1e2)
    r_psi = et.psi_vals[sel] / et.lam[sel] ** 1.5
    vt = ex.build_variogram(et)
    sx = (vt.x >= 1e-2) & (vt.x <= 1e2)
    r_sig = vt.sigma0_sq[sx] / vt.x[sx] ** 0.5
    x = np.logspace(-4, 4, 33)
    back = ex.phi_inv(vt, ex.phi_fn(vt, x))
    spread_psi = r_psi.max() / r_psi.min() - 1
    spread_sig = r_sig.max() / r_sig.min() - 1
    inv_err = float(np.max(np.abs(back / x - 1)))
    ok = spread_psi < 0.01 and spread_sig < 0.02 and inv_err < 1e-6
    _record(1, ok, f"psi/lam^1.5 spread {spread_psi:.2e}, sigma0^2/x^0.5 spread {spread_sig:.2e}, "
                   f"phi_inv(phi) err {inv_err:.1e}", time.perf_counter() - t0, 60)


def test_criterion_02_psi_pi_equivalences():
    t0 = time.perf_counter()
    parts, ok = [], True
    for model in ("stable15", "example51", "example52"):
        vt = ex.build_variogram(ms.stable(1.5) if model == "stable15" else
                                ms.dyadic_alternating() if model == "example51" else ms.switching_exponent())
        inf = ex.check_equivalence(vt, ex.Equivalence.PSI_OVER_PI_AT_INF)
        ok &= inf.passed
        parts.append(f"{model} inf drift {inf.drift:.3f}")
        ind = ms.estimate_indices(vt.model)
        if ind.c2_ok:
            zero = ex.check_equivalence(vt, ex.Equivalence.PSI_OVER_PI_AT_ZERO)
            ok &= zero.passed
            parts.append(f"zero drift {zero.drift:.3f}")
        if model == "example52":
            ok &= not ind.c1_ok and bool(np.isinf(ind.alpha_hi))
            parts.append(f"(C1) holds: {ind.c1_ok}")
        else:
            ok &= ind.c1_ok
    rep = _run("lemma-2.1", "example52")
    rec = _by_name(rep)
    ok &= rec["hypothesis-C1"].statistics["holds"] is False and rep.passed
    _record(2, ok, "; ".join(parts), time.perf_counter() - t0, 120)


def test_criterion_03_sandwich():
    t0 = time.perf_counter()
    parts, ok = [], True
    for model in ("stable15", "example51"):
        rec = _by_name(_run("lemma-2.2", model))
        ok &= rec["sandwich"].passed and rec["terms-same-order"].passed
        parts.append(f"{model} c={rec['sandwich'].statistics['fitted_c']:.3f}")
    rec = _by_name(_run("lemma-2.2", "example52"))
    ok &= rec["sandwich"].passed
    parts.append(f"example52 c={rec['sandwich'].statistics['fitted_c']:.3f}")
    _record(3, ok, ", ".join(parts), time.perf_counter() - t0, 60)


def test_criterion_04_max_location():
    t0 = time.perf_counter()
    rep = _run("lemma-2.9", n_paths=10_000, bins=20, T=[1.0])
    rec = _by_name(rep)
    dens = np.asarray(rec["density-bound-T1"].statistics["density"])
    bound = np.asarray(rec["density-bound-T1"].bounds["bound"])
    ks = rec["shift-ks-T1"].statistics["ks"]
    ok = rec["density-bound-T1"].passed and rec["shift-ks-T1"].passed
    _record(4, ok, f"max density/bound {np.max(dens / bound):.3f}, shift KS {ks:.4f}",
            time.perf_counter() - t0, 120)


def test_criterion_05_lower_tail_decay():
    t0 = time.perf_counter()
    rep = _run("lemma-3.3", n_paths=100_000, delta=0.5)
    rec = _by_name(rep)["decay-exponent"]
    g, se = rec.statistics["gamma_hat"], rec.statistics["gamma_se"]
    _record(5, rec.passed, f"gamma_hat {g:.3f} +/- {se:.3f} (need >= 1.6), counts {rec.statistics['counts']}",
            time.perf_counter() - t0, 600)


def test_criterion_06_brownian_lower_tail():
    t0 = time.perf_counter()
    rep = _run("bm-lowertail", n_paths=100_000)
    rec = _by_name(rep)["reflection-bound"]
    p = np.asarray(rec.statistics["estimate"])
    b = np.asarray(rec.bounds["bound"])
    _record(6, rec.passed, "P/bound = " + ", ".join(f"{v:.3f}" for v in p / b),
            time.perf_counter() - t0, 300)


def test_criterion_07_ray_knight():
    t0 = time.perf_counter()
    rep = _run("theorem-2.7", n_paths=5000, t_level=1.0, sites=[0.25, 0.5])
    rec = _by_name(rep)
    ks = max(rec["per-site-ks"].statistics["ks"])
    rel = max(rec["mean-identity"].statistics["rel_err"])
    ok = rec["per-site-ks"].passed and rec["mean-identity"].passed
    _record(7, ok, f"max KS {ks:.4f} (< 0.1), max mean rel err {rel:.4f} (< 0.05)",
            time.perf_counter() - t0, 1200)


def test_criterion_08_small_time_trends():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, key in (("lemma-4.1", "upper-statistic"), ("lemma-4.2", "lower-statistic"),
                      ("thm-1.1-trend", "favorite-ratio")):
        rec = _by_name(_run(name, n_paths=2000))[key]
        ok &= rec.passed
        med = ", ".join(f"{v:.3g}" for v in rec.statistics["medians"])
        parts.append(f"{name} medians [{med}] {'ok' if rec.passed else 'no'}")
    _record(8, ok, "; ".join(parts), time.perf_counter() - t0, 1800)


def test_criterion_09_correlation_decay():
    t0 = time.perf_counter()
    rep = _run("eq-4.4", n_max=64, k_max=64)
    rec = _by_name(rep)["weighted-sup-decreasing"]
    _record(9, rec.passed, f"weighted sup {rec.statistics['first']:.3f} -> {rec.statistics['last']:.2e} "
                           f"over k = 2..64", time.perf_counter() - t0, 60)


@pytest.mark.parametrize("dummy", [None])
def test_criterion_10_determinism(tmp_path, capsys, dummy):
    t0 = time.perf_counter()
    suites = ["lemma-2.9", "eq-4.4", "lemma-2.2", "ex-5.2", "lemma-3.1"]
    args = sum((["--suite", s] for s in suites), [])
    outs = []
    for sub, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
        main(["run", *args, "--seed", "7", "--jobs", jobs, "--svg", "--out", str(tmp_path / sub)])
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / sub).iterdir())})
    same = outs[0] == outs[1] == outs[2]
    summary = json.loads(outs[0]["summary_stable15_seed7.json"])
    _record(10, same and len(outs[0]) > 2 * len(suites),
            f"{len(outs[0])} files identical across 2 sequential runs and one --jobs 2 run; "
            f"suites passed: {summary['passed']}", time.perf_counter() - t0, 600)
