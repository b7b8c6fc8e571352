import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levylab import _walk_py
from levylab import exponent as ex
from levylab import measure as ms
from levylab import pathlab as pl
from levylab._kernels import BACKEND, STATUS_BUDGET, STATUS_LEVEL, STATUS_TIME

try:
    from levylab import _walk
except ImportError:  # pragma: no cover
    _walk = None

needs_ext = pytest.mark.skipif(_walk is None, reason="compiled kernel not built")


def _kernel_run(fn, incr, stop_occ, t_end, max_steps, accel=0.1):
    state = np.zeros(4)
    occ = np.zeros(41)
    r = fn(incr, state, occ, 1e-4, 1.5, accel, -0.205, 0.01, 20, stop_occ, t_end, max_steps)
    return r, state, occ


@needs_ext
@given(st.integers(0, 2 ** 31), st.sampled_from([-1.0, 0.002, 0.05]),
       st.sampled_from([math.inf, 0.37]), st.sampled_from([1e9, 500.0]))
@settings(max_examples=25, deadline=None)
def test_kernels_bitwise_identical(seed, stop_occ, t_end, max_steps):
    rng = np.random.default_rng(seed)
    incr = 0.005 * pl.stable_variates(rng, 1.5, 5000)
    a = _kernel_run(_walk_py.walk_block, incr, stop_occ, t_end, max_steps)
    b = _kernel_run(_walk.walk_block, incr, stop_occ, t_end, max_steps)
    assert a[0] == tuple(b[0])
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])


def test_compiled_backend_selected():
    assert BACKEND in ("cython", "python")
    if _walk is not None:
        assert BACKEND == "cython"


@pytest.mark.parametrize("stop_occ,t_end,max_steps,want", [
    (0.002, math.inf, 1e9, STATUS_LEVEL),
    (-1.0, 0.05, 1e9, STATUS_TIME),
    (-1.0, math.inf, 200.0, STATUS_BUDGET),
])
def test_kernel_stopping_rules(stop_occ, t_end, max_steps, want):
    rng = np.random.default_rng(0)
    incr = 0.002 * rng.standard_normal(20000)
    (status, k), state, occ = _kernel_run(_walk_py.walk_block, incr, stop_occ, t_end, max_steps,
                                          accel=math.inf)
    assert status == want
    # occupation is conserved: binned time plus time outside equals elapsed time
    assert occ.sum() + state[2] == pytest.approx(state[1], rel=1e-12)
    if want == STATUS_TIME:
        assert state[1] == pytest.approx(t_end, rel=1e-12)
    if want == STATUS_LEVEL:
        assert occ[20] > stop_occ


def test_stable_variates_characteristic_function(rng):
    x = pl.stable_variates(rng, 1.5, 200000)
    for lam in (0.3, 1.0, 2.0):
        c = np.cos(lam * x)
        assert abs(c.mean() - math.exp(-lam ** 1.5)) < 4 * c.std() / math.sqrt(x.size)


@pytest.mark.parametrize("mode,eps", [("exact", 1e-3), ("cp", 0.05)])
def test_endpoint_characteristic_function(stable15, mode, eps):
    x = pl.sample_endpoint(stable15, 1.0, 100000, seed=3, mode=mode, eps_jump=eps)
    for lam in (0.5, 1.0, 2.0):
        c = np.cos(lam * x)
        assert abs(c.mean() - math.exp(-ex.psi(stable15, lam))) < 4 * c.std() / math.sqrt(x.size)


def test_cp_mode_budget_guard(stable15):
    with pytest.raises(pl.PathError):
        pl.sample_endpoint(stable15, 1.0, 10 ** 6, mode="cp", eps_jump=1e-6)


def test_exact_mode_requires_self_similarity():
    with pytest.raises(pl.PathError):
        pl.simulate_path(ms.dyadic_alternating(), 0.1, mode="exact")


def test_brownian_zero_local_time_mean():
    # ψ = λ² means X = √2·B, whose density at 0 integrates to E L⁰_1 = 1/√π
    m = ms.gaussian_only(1.0)
    spec = pl.WalkSpec(width=0.02, half_bins=200, dt=2e-5, t_end=1.0)
    ens = pl.run_ensemble(m, 2000, spec, seed=11)
    L0 = ens.local_times[:, ens.zero_index]
    assert L0.mean() == pytest.approx(1 / math.sqrt(math.pi), rel=0.05)
    assert np.all(ens.time == pytest.approx(1.0))


def test_ensemble_is_deterministic(stable15):
    spec = pl.WalkSpec(width=0.05, half_bins=20, dt=1e-3, t_end=0.2, accel_window=1.0)
    a = pl.run_ensemble(stable15, 20, spec, seed=4)
    b = pl.run_ensemble(stable15, 20, spec, seed=4)
    assert np.array_equal(a.occupation, b.occupation)


def _record(times, positions):
    return pl.PathRecord(times[-1], times[1] - times[0], None, 0.0, 0, "exact",
                         np.asarray(times, float), np.asarray(positions, float))


def test_local_time_and_inverse_local_time():
    rec = _record([0, 1, 2, 3, 4], [0.0, 0.3, 0.0, 0.05, 1.0])
    fld = pl.local_time(rec, 0.2)
    # steps starting at 0, 0.3, 0, 0.05 → bins 0, 2 (0.3/0.2 rounds to 2), 0, 0
    z = fld.zero_index
    assert fld.occupation[0, z] == pytest.approx(3.0)
    assert fld.occupation[0].sum() + fld.outside[0] == pytest.approx(4.0)
    # τ(t) = inf{s : L⁰_s > t}: the flat stretch at occupation 1 pushes τ(5) to 2
    assert pl.inverse_local_time(fld, 4.0) == pytest.approx(0.8)
    assert pl.inverse_local_time(fld, 5.0) == pytest.approx(2.0)
    assert pl.inverse_local_time(fld, 12.5) == pytest.approx(3.5)
    assert math.isinf(pl.inverse_local_time(fld, 100.0))


def test_occupation_at_intermediate_time():
    rec = _record([0, 1, 2, 3], [0.0, 0.5, 0.0, 0.5])
    fld = pl.local_time(rec, 0.5, checkpoints=[3.0])
    occ = pl.occupation_at(fld, 1.5)
    assert occ.sum() == pytest.approx(1.5)


def test_favorite_tie_breaking():
    centers = np.array([-0.2, -0.1, 0.0, 0.1, 0.2])
    j, m = pl._favorite_from(np.array([3.0, 1.0, 0.0, 1.0, 3.0]), centers)
    assert centers[j] == 0.2 and m == 3.0
    j, _ = pl._favorite_from(np.array([0.0, 2.0, 1.0, 2.0, 0.0]), centers)
    assert centers[j] == 0.1


def test_trend_helper():
    mk = lambda t, med, lo, hi: pl.LevelSummary(t, med, lo, hi, lo, hi, 100, 0)
    up = [mk(0.5, 1.0, 0.9, 1.1), mk(0.25, 1.5, 1.4, 1.6), mk(0.125, 2.0, 1.9, 2.1)]
    tr = pl.trend(up)
    assert tr["increasing"] and tr["endpoints_separated"] and not tr["nonincreasing"]
    flat = [mk(0.5, 1.0, 0.5, 1.5), mk(0.25, 1.0, 0.5, 1.5)]
    assert not pl.trend(flat)["endpoints_separated"]


@pytest.mark.parametrize("model", ["stable", "brownian"])
def test_polarity_weighted_sup_decreases(model, vt_stable, vt_brownian):
    vt = vt_stable if model == "stable" else vt_brownian
    r = pl.polarity_ratio_check(vt)
    assert r.monotone and r.cauchy_schwarz_ok and r.n_unresolved == 0
    if model == "brownian":
        # u(x, y) = min(x, y) for x, y > 0: ρ_k = 2^{-k/2}
        assert r.decay_exponent == pytest.approx(0.5, rel=1e-6)


def test_polarity_generic_model():
    r = pl.polarity_ratio_check(ex.build_variogram(ms.dyadic_alternating()), n_max=24, k_max=20)
    assert r.cauchy_schwarz_ok
    assert np.nanmax(np.abs(r.correlation)) <= 1 + 1e-9


def test_spread_scale_stable(vt_stable):
    # t·ψ(1/x) = 1 with ψ = Cλ^{3/2}: x = (C t)^{2/3}
    c = ex.stable_constant(1.5)
    assert pl.spread_scale(vt_stable, 0.1) == pytest.approx((c * 0.1) ** (2 / 3), rel=1e-6)
