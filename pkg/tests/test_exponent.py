import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as G

from levylab import exponent as ex
from levylab import measure as ms


def _fbm_constant(alpha: float) -> float:
    """σ₀²(x)/|x|^{α-1} from ∫₀^∞ (1 - cos u) u^{-α} du = -Γ(1-α) cos(π(α-1)/2)."""
    integral = -G(1 - alpha) * math.cos(math.pi * (alpha - 1) / 2)
    return 2 / math.pi * integral / ex.stable_constant(alpha)


@pytest.mark.parametrize("alpha", [0.5, 1.1, 1.5, 1.9])
def test_psi_stable_closed_form(alpha):
    lam = np.logspace(-3, 3, 13)
    got = ex.psi(ms.stable(alpha), lam)
    np.testing.assert_allclose(got, ex.stable_constant(alpha) * lam ** alpha, rtol=1e-7)


def test_stable_constant_value():
    assert ex.stable_constant(1.5) == pytest.approx(1.6710855, rel=1e-7)


def test_gaussian_part_is_additive():
    lam = np.array([0.1, 1.0, 10.0])
    a = ex.psi(ms.stable(1.5, gaussian_coef=0.7), lam) - ex.psi(ms.stable(1.5), lam)
    np.testing.assert_allclose(a, 0.49 * lam ** 2, rtol=1e-9)


@given(st.floats(1e-2, 1e2), st.floats(0.1, 10.0))
@settings(max_examples=40, deadline=None)
def test_psi_scaling(lam, c):
    m = ms.stable(1.3)
    assert ex.psi(m, c * lam) == pytest.approx(c ** 1.3 * ex.psi(m, lam), rel=1e-7)


def test_psi_rejects_negative_lambda():
    with pytest.raises(ValueError):
        ex.psi(ms.stable(1.5), -1.0)


def test_pi_is_sidedness_free():
    m = ms.stable(1.5)
    lam = np.logspace(-2, 2, 5)
    np.testing.assert_allclose(ex.pi_fn(m, lam), ex.pi_fn(m.with_sidedness("two-sided"), lam))
    np.testing.assert_allclose(ex.pi_fn(m, lam), 2 * lam ** 1.5 / 1.5)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_sigma0_sq_matches_fbm(alpha):
    x = np.logspace(-2, 2, 9)
    got = ex.sigma0_sq(ms.stable(alpha), x)
    np.testing.assert_allclose(got, _fbm_constant(alpha) * x ** (alpha - 1), rtol=1e-6)


def test_sigma0_sq_value_stable15(vt_stable):
    assert vt_stable.sigma0_sq_at(1.0) == pytest.approx(0.95493, rel=1e-5)
    assert ex.phi_fn(vt_stable, 1.0) == pytest.approx(2.39365, rel=1e-5)


def test_brownian_variogram_is_abs(vt_brownian):
    x = np.array([1e-3, 0.1, 1.0, 10.0])
    np.testing.assert_allclose(ex.sigma0_sq(vt_brownian.exponent, x), x, rtol=1e-6)


def test_phi_inverse_roundtrip(vt_stable):
    x = np.logspace(-4, 4, 17)
    y = ex.phi_fn(vt_stable, x)
    np.testing.assert_allclose(ex.phi_inv(vt_stable, y), x, rtol=1e-9)


@pytest.mark.parametrize("y", [1e-9, 1e-5, 1e4, 1e8])
def test_phi_inverse_beyond_grid(vt_stable, y):
    # stable 1.5: phi(x) = phi(1) sqrt(x) on all scales
    closed = (y / ex.phi_fn(vt_stable, 1.0)) ** 2
    assert ex.phi_inv(vt_stable, y) == pytest.approx(closed, rel=1e-8)


@pytest.mark.parametrize("y", [0.0, -1.0, np.nan])
def test_phi_inverse_rejects_nonpositive(vt_stable, y):
    with pytest.raises(ValueError):
        ex.phi_inv(vt_stable, y)


def test_quadrature_tolerance_halving():
    m = ms.dyadic_alternating()
    lam = np.logspace(-2, 2, 9)
    tol = 1e-8
    a, b = ex.psi(m, lam, tol), ex.psi(m, lam, tol / 2)
    assert np.max(np.abs(a / b - 1)) < 10 * tol
    x = np.logspace(-2, 2, 5)
    s1 = ex.sigma0_sq(ex.build_table(m, tol=tol), x, tol)
    s2 = ex.sigma0_sq(ex.build_table(m, tol=tol / 2), x, tol / 2)
    assert np.max(np.abs(s1 / s2 - 1)) < 10 * tol


def test_stable_is_recurrent_with_local_times(vt_stable):
    assert vt_stable.exponent.is_recurrent()
    assert vt_stable.exponent.has_local_times


def test_sigma0_hat_is_running_max():
    vt = ex.build_variogram(ms.switching_exponent())
    assert np.all(np.diff(vt.sigma0_hat_sq) >= 0)
    assert np.all(vt.sigma0_hat_sq >= vt.sigma0_sq)


def test_increment_autocov_forms_agree(vt_stable):
    # the closed power-law form against plain second differences at short lags
    g = ex.increment_autocov(vt_stable, 0.01, 10)
    K, beta = vt_stable.power_law
    s = K * (0.01 * np.arange(12)) ** beta
    direct = 0.5 * (s[2:] + s[:-2] - 2 * s[1:-1])
    np.testing.assert_allclose(g[1:], direct[:9], rtol=1e-8)
    assert g[0] == pytest.approx(s[1])
    assert np.all(g[1:] < 0)  # H < 1/2: negatively correlated increments


def test_ratio_control_stable(vt_stable):
    r = ex.check_ratio_control(vt_stable, "at-infinity", (1.5, 1.5), "pi")
    assert r.passed and r.n_pairs > 100
    bad = ex.check_ratio_control(vt_stable, "at-infinity", (1.6, 1.7), "pi")
    assert not bad.passed and bad.worst > 0


def test_ratio_control_phi_needs_variogram(vt_stable):
    with pytest.raises(TypeError):
        ex.check_ratio_control(vt_stable.exponent, "at-zero", (0.5, 0.5), "phi")


@pytest.mark.parametrize("which", list(ex.Equivalence))
def test_equivalences_stable(vt_stable, which):
    rep = ex.check_equivalence(vt_stable, which)
    assert rep.passed
    assert rep.drift < 1e-3  # exact power laws: the ratio is constant


def test_sandwich_example51():
    vt = ex.build_variogram(ms.dyadic_alternating())
    assert np.all(vt.sigma0_hat_sq <= 2 * vt.H * (1 + 1e-9))
    assert (vt.sigma0_hat_sq / vt.H).min() > 0.1
