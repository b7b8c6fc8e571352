import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levylab import exponent as ex
from levylab import gaussian as gs
from levylab import measure as ms


def test_covariance_is_fbm(vt_stable):
    # σ₀² = K|x|^{1/2}: the covariance of a multiple of fBm with H = 1/4
    x, y = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9))
    K = vt_stable.power_law[0]
    ref = 0.5 * K * (np.abs(x) ** 0.5 + np.abs(y) ** 0.5 - np.abs(x - y) ** 0.5)
    np.testing.assert_allclose(gs.covariance(vt_stable, x, y), ref, atol=1e-12)


def test_covariance_zero_at_origin(vt_stable):
    assert gs.covariance(vt_stable, 0.0, 0.7) == pytest.approx(0.0, abs=1e-14)


def test_field_variance_matches_variogram(vt_stable):
    fld = gs.make_field(vt_stable, gs.uniform_sites(1.0, 0.25))
    P = gs.sample(fld, 40000, seed=3)
    np.testing.assert_allclose(P.var(axis=0)[fld.sites != 0], vt_stable.sigma0_sq_at(fld.sites[fld.sites != 0]),
                               rtol=0.03)
    assert np.all(P[:, fld.zero_index] == 0)


def test_field_rejects_bad_grids(vt_stable):
    with pytest.raises(ValueError):
        gs.make_field(vt_stable, [-1.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        gs.make_field(vt_stable, [-1.0, 0.0, 0.5])


def test_sampling_is_deterministic(vt_stable):
    fld = gs.make_field(vt_stable, gs.uniform_sites(1.0, 0.1))
    a = gs.sample(fld, 1000, seed=5, tag=2)
    b = gs.sample(fld, 1000, seed=5, tag=2)
    c = gs.sample(fld, 1000, seed=6, tag=2)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_increment_field_brownian(vt_brownian):
    fld = gs.IncrementField(vt_brownian, 1.0, 256, seed=1, single=False)
    P = np.concatenate(list(fld.sample_chunks(20000)))
    assert P.shape == (20000, 257)
    inc = np.diff(P, axis=1)
    assert inc.var() == pytest.approx(fld.spacing, rel=0.02)
    c = np.corrcoef(inc[:, 10], inc[:, 11])[0, 1]
    assert abs(c) < 0.03


def test_increment_field_endpoint_variance(vt_stable):
    fld = gs.IncrementField(vt_stable, 0.5, 512, seed=2, single=False)
    P = np.concatenate(list(fld.sample_chunks(20000)))
    assert P[:, -1].var() == pytest.approx(vt_stable.sigma0_sq_at(0.5), rel=0.04)
    assert P[:, 0].var() == pytest.approx(vt_stable.sigma0_sq_at(0.5), rel=0.04)


def test_refined_lower_tail_matches_direct(vt_stable):
    # screening on 2^6 sites plus exact conditional refinement to 2^10 should
    # reproduce the tail frequencies of direct sampling on 2^10 sites
    hs = 2.0 ** -np.arange(1, 5)
    n = 20000
    ref, _ = gs.lower_tail_refined(vt_stable, 0.5, hs, n, seed=2, n_coarse=1 << 6, n_fine=1 << 10)
    direct = gs.lower_tail_nested(gs.IncrementField(vt_stable, 0.5, 1 << 10, seed=9), hs, n, levels=1)[0]
    for e, c in zip(ref, direct):
        se = math.sqrt(e.count + c + 1)
        assert abs(e.count - c) < 4 * se


def test_refinement_only_raises_the_max(vt_stable):
    hs = 2.0 ** -np.arange(1, 4)
    fld = gs.IncrementField(vt_stable, 0.5, 1 << 10, seed=9)
    c = gs.lower_tail_nested(fld, hs, 10000, levels=4)
    assert np.all(np.diff(c, axis=0) >= 0)  # coarser grids see more small maxima


def test_leftmost_argmax_ties():
    sites = np.array([-1.0, 0.0, 1.0, 2.0])
    paths = np.array([[0.0, 0.0, 3.0, 3.0], [5.0, 0.0, 1.0, 1.0]])
    tau, m = gs.leftmost_argmax(paths, sites, 0.0, 2.0)
    assert tau.tolist() == [1.0, 1.0]
    assert m.tolist() == [3.0, 1.0]
    s = gs.leftmost_max(paths[0], sites, -1.0, 0.0)
    assert s.tau == -1.0 and s.value == 0.0


@given(st.floats(0.5, 2.5), st.floats(1e-3, 1.0))
@settings(max_examples=30, deadline=None)
def test_fit_decay_exponent_exact(gamma, scale):
    hs = 2.0 ** -np.arange(1, 7)
    n = 10 ** 9
    est = [gs.TailEstimate(h, scale * h ** gamma, 0, 0, int(scale * h ** gamma * n), n) for h in hs]
    g, se = gs.fit_decay_exponent(hs, est)
    assert g == pytest.approx(gamma, rel=1e-9)
    assert se > 0


def test_fit_decay_exponent_drops_zero_counts():
    hs = np.array([0.5, 0.25, 0.125])
    est = [gs.TailEstimate(h, p, 0, 0, int(p * 100), 100) for h, p in zip(hs, [0.2, 0.05, 0.0])]
    g, _ = gs.fit_decay_exponent(hs, est)
    assert g == pytest.approx(2.0)


def test_upper_tail_probe_monotone(vt_stable):
    fld = gs.make_field(vt_stable, gs.uniform_sites(1.0, 0.05))
    est, mean, se = gs.upper_tail_probe(fld, 1.0, [0.0, 1.0, 2.0, 4.0], 5000, seed=1)
    p = [e.estimate for e in est]
    assert p[0] == 1.0 and all(a >= b for a, b in zip(p, p[1:]))
    assert mean > 0 and se > 0


def test_rkhs_norm_scaling_stable():
    # ψ(λ) = Cλ^α gives ‖f_h‖² ∝ h^{1+a(1-α)}
    vt = ex.build_variogram(ms.stable(1.5))
    n1 = gs.rkhs_norm(vt, gs.RkhsShift(0.5, 1.0))
    n2 = gs.rkhs_norm(vt, gs.RkhsShift(0.25, 1.0))
    assert n2 / n1 == pytest.approx(0.5 ** 0.5, rel=1e-3)
    assert gs.rkhs_norm(vt, gs.RkhsShift(0.0, 1.0)) == 0.0


def test_bump_profile():
    assert gs.bump(0.0) == pytest.approx(1.0)
    assert gs.bump(1.0) == 0.0 and gs.bump(-1.2) == 0.0
    # the transform at 0 is the integral of the profile
    from scipy.integrate import quad
    area = quad(lambda x: float(gs.bump(x)), -1, 1)[0]
    assert gs.bump_hat(0.0)[0] == pytest.approx(area, rel=1e-8)


def test_cameron_martin_identity(vt_stable):
    fld = gs.make_field(vt_stable, gs.uniform_sites(1.0, 0.05))
    shift = gs.RkhsShift(0.5, 1.0, amplitude=0.5)
    r = gs.cameron_martin_check(fld, shift.centered(fld.sites), 1.0, 40000, seed=4)
    assert r.stable and r.passed, r
