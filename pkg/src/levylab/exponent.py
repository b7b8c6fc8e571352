"""Characteristic exponent ψ and its derived tail functions.

ψ is computed band by band: on θ = c·x^p the substitution u = λx gives

    ∫ (1-cos λx) x^{-p}/c dx = λ^{p-1}/c · ∫ (1-cos u) u^{-p} du,

split at u = 1 into a power series and a closed-form piece minus a cosine tail.
σ₀², φ and H work from a monotone log-log interpolant of ψ on a fine grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import _quad
from .measure import LevyModel

__all__ = [
    "QuadratureError",
    "LocalTimeError",
    "psi",
    "pi_fn",
    "ExponentTable",
    "VariogramTable",
    "build_table",
    "build_variogram",
    "increment_autocov",
    "sigma0_sq",
    "sigma0_hat_sq",
    "phi_fn",
    "phi_inv",
    "H_fn",
    "Regime",
    "Equivalence",
    "RatioReport",
    "EquivalenceReport",
    "check_ratio_control",
    "check_equivalence",
    "stable_constant",
]


class QuadratureError(RuntimeError):
    def __init__(self, msg, estimate=None, achieved=None):
        super().__init__(msg)
        self.estimate = estimate
        self.achieved = achieved


class LocalTimeError(ValueError):
    pass


_PSI_ACC = 1e-11  # achieved relative accuracy of the band kernel


def stable_constant(alpha: float, scale: float = 1.0) -> float:
    """ψ(λ)/λ^α for density x^{-α-1}/scale: -Γ(-α)cos(πα/2)/scale."""
    return -math.gamma(-alpha) * math.cos(math.pi * alpha / 2) / scale


def psi(model: LevyModel, lam, tol: float = 1e-8):
    """ψ(λ) = A²λ² + ∫₀^∞ (1 - cos λx) dx/θ(x)."""
    lam_a = np.asarray(lam, dtype=float)
    if np.any(lam_a < 0):
        raise ValueError("psi is evaluated on lambda >= 0 (it is even)")
    if tol < _PSI_ACC:
        raise QuadratureError(f"requested tol {tol:g} below achievable {_PSI_ACC:g}",
                              achieved=_PSI_ACC)
    lv = np.atleast_1d(lam_a)
    out = model.gaussian_coef**2 * lv**2
    pos = lv > 0
    lp = lv[pos]
    acc = np.zeros(lp.shape)
    for b in model.bands:
        acc += lp ** (b.p - 1.0) / b.c * _quad.one_minus_cos_power(lp * b.lo, lp * b.hi, b.p)
    out[pos] += acc
    return out.reshape(lam_a.shape) if lam_a.ndim else float(out[0])


def pi_fn(model: LevyModel, lam):
    """π(λ) = 2∫_{1/λ}^∞ dz/θ(z), independent of the sidedness switch."""
    lam_a = np.asarray(lam, dtype=float)
    if np.any(lam_a <= 0):
        raise ValueError("pi_fn needs lambda > 0")
    return 2.0 * model.one_sided_tail(1.0 / lam_a)


class _LogLog:
    """PCHIP in (ln x, ln y) with power-law continuation past both ends."""

    def __init__(self, x, y):
        self.lx, self.ly = np.log(x), np.log(y)
        self.f = PchipInterpolator(self.lx, self.ly, extrapolate=False)
        df = self.f.derivative()
        self.s_lo, self.s_hi = float(df(self.lx[0])), float(df(self.lx[-1]))

    def __call__(self, x):
        lx = np.log(np.asarray(x, dtype=float))
        out = self.f(np.clip(lx, self.lx[0], self.lx[-1]))
        lo, hi = lx < self.lx[0], lx > self.lx[-1]
        out = np.where(lo, self.ly[0] + self.s_lo * (lx - self.lx[0]), out)
        out = np.where(hi, self.ly[-1] + self.s_hi * (lx - self.lx[-1]), out)
        return np.exp(out)


@dataclass
class ExponentTable:
    model: LevyModel
    lam: np.ndarray
    psi_vals: np.ndarray
    pi_vals: np.ndarray
    tol: float
    _interp: _LogLog = field(init=False, repr=False)

    def __post_init__(self):
        self._interp = _LogLog(self.lam, self.psi_vals)
        self.slope_zero = self._interp.s_lo
        self.slope_inf = self._interp.s_hi
        # cumulative ∫ dλ/ψ and ∫ λ²dλ/ψ per cell, in s = ln λ
        edges = np.log(self.lam)
        self._cell_inv = _quad.gl_panels(lambda s: np.exp(s) / self._interp(np.exp(s)), edges)
        self._cell_sq = _quad.gl_panels(lambda s: np.exp(3 * s) / self._interp(np.exp(s)), edges)
        self._tail_inv_top = (self.lam[-1] / self.psi_vals[-1] / (self.slope_inf - 1.0)
                              if self.slope_inf > 1.0 else math.inf)
        self._head_sq = (self.lam[0] ** 3 / self.psi_vals[0] / (3.0 - self.slope_zero)
                         if self.slope_zero < 3.0 else math.inf)
        # from the top down: above[i] = ∫_{λ_i}^∞ dλ/ψ
        self._above = np.concatenate([np.cumsum(self._cell_inv[::-1])[::-1], [0.0]]) + self._tail_inv_top
        self._below_sq = np.concatenate([[0.0], np.cumsum(self._cell_sq)]) + self._head_sq

    def psi(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = self._interp(np.where(lam > 0, lam, 1.0))
        return np.where(lam > 0, out, 0.0)

    def pi(self, lam):
        return pi_fn(self.model, lam)

    @property
    def has_local_times(self) -> bool:
        return self.slope_inf > 1.0

    def require_local_times(self):
        if not self.has_local_times:
            raise LocalTimeError("no local times: ∫ 1/ψ diverges at ∞")

    def inv_tail(self, lam):
        """∫_λ^∞ dz/ψ(z), vectorized over λ > 0."""
        self.require_local_times()
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        s = np.log(lam)
        edges = np.log(self.lam)
        i = np.searchsorted(edges, s, side="right")  # lam in cell (i-1, i)
        out = np.empty(lam.shape)
        top = i >= len(edges)
        if np.any(top):
            L = lam[top]
            out[top] = L / self._interp(L) / (self.slope_inf - 1.0)
        mid = ~top
        if np.any(mid):
            ii = i[mid]
            part = _quad.gl_panels(lambda t: np.exp(t) / self._interp(np.exp(t)),
                                   np.stack([s[mid], edges[ii]], axis=-1))[..., 0]
            out[mid] = part + self._above[ii]
        return out

    def sq_head(self, lam):
        """∫_0^λ z² dz/ψ(z), vectorized over λ > 0."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        s = np.log(lam)
        edges = np.log(self.lam)
        i = np.searchsorted(edges, s, side="right") - 1  # lam in cell (i, i+1)
        out = np.empty(lam.shape)
        low = i < 0
        if np.any(low):
            L = lam[low]
            out[low] = L**3 / self._interp(L) / (3.0 - self.slope_zero)
        rest = ~low
        if np.any(rest):
            ii = i[rest]
            part = _quad.gl_panels(lambda t: np.exp(3 * t) / self._interp(np.exp(t)),
                                   np.stack([edges[ii], s[rest]], axis=-1))[..., 0]
            out[rest] = part + self._below_sq[ii]
        return out

    def is_recurrent(self) -> bool:
        """∫₀¹ dλ/ψ = ∞, judged from decade increments at the bottom of the grid."""
        decs = np.array([-1.0, -2.0, -3.0, -4.0, -5.0])
        lo = 10.0 ** (decs + math.log10(self.lam[0]) + 5)
        # increments over successive decades toward 0; divergence iff they do not shrink
        inc = [float(self.inv_tail(a)[0] - self.inv_tail(10 * a)[0]) for a in lo]
        return inc[-1] >= inc[-2] * (1 - 1e-3) or self.slope_zero >= 1.0


def build_table(model: LevyModel, lam_min: float = 1e-6, lam_max: float = 1e6,
                per_decade: int = 64, tol: float = 1e-8) -> ExponentTable:
    n = int(round(per_decade * math.log10(lam_max / lam_min))) + 1
    lam = np.logspace(math.log10(lam_min), math.log10(lam_max), n)
    pv = psi(model, lam, tol)
    if np.any(pv <= 0):
        raise QuadratureError("psi vanished on the grid", estimate=pv)
    piv = pi_fn(model, lam) if model.bands else np.zeros_like(lam)
    return ExponentTable(model, lam, pv, piv, tol)


# -- x-side functions ----------------------------------------------------------

def _sigma0_sq_direct(table: ExponentTable, x, tol: float = 1e-8, n_half: int = 48):
    """(2/π)∫₀^∞ (1-cos λx)/ψ(λ) dλ in u = λx, returned with an error estimate."""
    table.require_local_times()
    x = np.atleast_1d(np.abs(np.asarray(x, dtype=float)))
    out = np.zeros(x.shape)
    err = np.zeros(x.shape)
    pos = x > 0
    xs = x[pos][:, None]
    g = lambda u: 1.0 / table.psi(u / xs[..., None]) if u.ndim == 3 else 1.0 / table.psi(u / xs)
    # inner: u in (0, 1], panels uniform in ln u, closed-form power piece below u0
    u0 = 1e-9
    n_in = 36 if tol >= 1e-9 else 72
    s_edges = np.broadcast_to(np.linspace(math.log(u0), 0.0, n_in + 1), (xs.shape[0], n_in + 1))
    inner = _quad.gl_panels(
        lambda s: 2 * np.sin(np.exp(s) / 2) ** 2 * np.exp(s) * g(np.exp(s)),
        s_edges).sum(axis=1)
    beta0 = table.slope_zero
    inner += 0.5 * u0**3 * g(np.full((xs.shape[0], 1), u0))[:, 0] / (3.0 - beta0)
    # outer: ∫₁^∞ du/ψ(u/x) = x·∫_{1/x}^∞ dλ/ψ, minus the alternating cosine integral
    flat = x[pos] * table.inv_tail(1.0 / x[pos])
    zeros = np.concatenate([[1.0], (np.arange(n_half) + 0.5) * math.pi])
    edges = np.broadcast_to(zeros, (xs.shape[0], zeros.size))
    pieces = _quad.gl_panels(lambda u: np.cos(u) * g(u), edges)
    cos_lim, cos_err = _quad.wynn_epsilon(np.cumsum(pieces, axis=1))
    total = inner + flat - cos_lim
    out[pos] = 2.0 / math.pi * total / x[pos]
    err[pos] = 2.0 / math.pi * np.abs(cos_err) / x[pos]
    return out, err


def sigma0_sq(model_or_table, x, tol: float = 1e-8):
    """σ₀²(x) = (2/π)∫₀^∞ (1-cos λx)/ψ(λ) dλ."""
    table = _as_table(model_or_table, x)
    xa = np.asarray(x, dtype=float)
    val, err = _sigma0_sq_direct(table, xa, tol)
    nz = val > 0
    if np.any(err[nz] > max(tol, 1e-12) * val[nz] * 10):
        raise QuadratureError("sigma0_sq did not reach tolerance", estimate=val,
                              achieved=float(np.max(err[nz] / val[nz])))
    return val.reshape(xa.shape) if xa.ndim else float(val[0])


def _as_table(obj, x=None) -> ExponentTable:
    if isinstance(obj, ExponentTable):
        return obj
    if isinstance(obj, VariogramTable):
        return obj.exponent
    xa = np.abs(np.atleast_1d(np.asarray(x if x is not None else 1.0, dtype=float)))
    xa = xa[xa > 0]
    xmin = xa.min() if xa.size else 1.0
    xmax = xa.max() if xa.size else 1.0
    return build_table(obj, min(1e-6, 1e-3 / xmax), max(1e6, 1e3 / xmin))


def phi_fn(model_or_table, x):
    """φ(x) = 2∫_{1/x}^∞ dλ/ψ(λ)."""
    table = _as_table(model_or_table, x)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError("phi_fn needs x > 0")
    v = 2.0 * table.inv_tail(1.0 / np.atleast_1d(xa))
    return v.reshape(xa.shape) if xa.ndim else float(v[0])


def H_fn(model_or_table, x):
    """H(1/x) = 2∫₀^{1/x} (λx)² dλ/ψ + 2∫_{1/x}^∞ dλ/ψ."""
    table = _as_table(model_or_table, x)
    xa = np.atleast_1d(np.abs(np.asarray(x, dtype=float)))
    v = 2.0 * xa**2 * table.sq_head(1.0 / xa) + 2.0 * table.inv_tail(1.0 / xa)
    return v.reshape(np.shape(x)) if np.ndim(x) else float(v[0])


@dataclass
class VariogramTable:
    exponent: ExponentTable
    x: np.ndarray
    sigma0_sq: np.ndarray
    sigma0_hat_sq: np.ndarray
    phi: np.ndarray
    H: np.ndarray
    err: np.ndarray
    _s_interp: _LogLog = field(init=False, repr=False)

    def __post_init__(self):
        self._s_interp = _LogLog(self.x, self.sigma0_sq)
        self._phi_interp = PchipInterpolator(np.log(self.x), np.log(self.phi))

    @property
    def model(self) -> LevyModel:
        return self.exponent.model

    @property
    def power_law(self) -> tuple[float, float] | None:
        """(K, β) when σ₀²(x) = K|x|^β exactly (pure stable or pure Gaussian model)."""
        if not hasattr(self, "_power"):
            m = self.model
            beta = None
            if not m.has_jumps:
                beta = 1.0
            elif m.kind == "stable" and m.gaussian_coef == 0 and len(m.bands) == 1:
                beta = m.bands[0].p - 2.0
            self._power = None if beta is None else \
                (float(_sigma0_sq_direct(self.exponent, np.array([1.0]))[0][0]), beta)
        return self._power

    def sigma0_sq_at(self, x, exact_limit: int = 4096):
        """σ₀² at arbitrary x: closed form for power laws, else direct quadrature
        for few distinct |x| and interpolation otherwise."""
        xa = np.abs(np.asarray(x, dtype=float))
        if self.power_law is not None:
            K, beta = self.power_law
            return K * xa ** beta
        flat = xa.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        pos = uniq > 0
        vals = np.zeros(uniq.shape)
        if pos.sum() <= exact_limit:
            vals[pos] = _sigma0_sq_direct(self.exponent, uniq[pos])[0]
        else:
            vals[pos] = self._s_interp(uniq[pos])
        return vals[inv].reshape(xa.shape)


def increment_autocov(vtable: VariogramTable, spacing: float, n: int) -> np.ndarray:
    """Autocovariance γ(k), k = 0..n-1, of the increments η((j+1)s) - η(js).

    γ(k) = ½(σ₀²((k+1)s) + σ₀²((k-1)s) - 2σ₀²(ks)) is a second difference, so
    for power laws it is evaluated in a cancellation-free form.
    """
    k = np.arange(n, dtype=float)
    if vtable.power_law is not None:
        K, beta = vtable.power_law
        out = np.empty(n)
        out[0] = K * spacing ** beta
        kk = k[1:]
        inv = 1.0 / kk
        with np.errstate(divide="ignore"):  # log1p(-1) = -inf at k = 1 is intended
            out[1:] = 0.5 * K * (spacing * kk) ** beta * (
                np.expm1(beta * np.log1p(inv)) + np.expm1(beta * np.log1p(-inv)))
        if beta == 1.0:  # Brownian increments are uncorrelated
            out[1:] = 0.0
        return out
    sv = vtable.sigma0_sq_at(np.arange(n + 1, dtype=float) * spacing)
    g = 0.5 * (sv[2:] + sv[:-2] - 2 * sv[1:-1])
    return np.concatenate([[sv[1]], g])


def build_variogram(model_or_table, x_min: float = 1e-6, x_max: float = 1e6,
                    per_decade: int = 64, tol: float = 1e-8) -> VariogramTable:
    if isinstance(model_or_table, ExponentTable):
        table = model_or_table
    else:
        table = build_table(model_or_table, min(1e-6, 1e-3 / x_max), max(1e6, 1e3 / x_min), tol=tol)
    n = int(round(per_decade * math.log10(x_max / x_min))) + 1
    x = np.logspace(math.log10(x_min), math.log10(x_max), n)
    s, err = _sigma0_sq_direct(table, x, tol)
    shat = np.maximum.accumulate(s)
    ph = phi_fn(table, x)
    h = H_fn(table, x)
    return VariogramTable(table, x, s, shat, ph, h, err)


def sigma0_hat_sq(vtable: VariogramTable, h):
    """max_{|x|<=h} σ₀²(x): running max over the grid, refined at the endpoint h."""
    ha = np.atleast_1d(np.abs(np.asarray(h, dtype=float)))
    if np.any(ha > vtable.x[-1] * (1 + 1e-12)):
        raise ValueError("h beyond the variogram grid; rebuild with a larger x_max")
    i = np.searchsorted(vtable.x, ha, side="right") - 1
    grid_max = np.where(i >= 0, vtable.sigma0_hat_sq[np.clip(i, 0, None)], 0.0)
    out = np.maximum(grid_max, vtable.sigma0_sq_at(ha))
    return out.reshape(np.shape(h)) if np.ndim(h) else float(out[0])


def phi_inv(vtable: VariogramTable, y, rtol: float = 1e-12):
    """Inverse of φ by root finding on φ itself, bracketed by the grid.

    Outside the grid the bracket is widened geometrically; φ itself continues
    through the power-law tail extensions of the exponent table.
    """
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(~np.isfinite(ya) | (ya <= 0)):
        raise ValueError("phi_inv needs finite y > 0")
    table = vtable.exponent
    lx = np.log(vtable.x)
    out = np.empty(ya.shape)
    for k, yk in enumerate(ya):
        j = int(np.clip(np.searchsorted(vtable.phi, yk), 1, len(lx) - 1))
        a, b = lx[j - 1], lx[j]
        if yk == vtable.phi[j]:
            out[k] = vtable.x[j]
            continue
        f = lambda s: math.log(2.0 * table.inv_tail(1.0 / math.exp(s))[0]) - math.log(yk)
        fa, fb = f(a), f(b)
        step = 0.1
        while fa > 0:
            a -= step
            step *= 2
            fa = f(a)
        step = 0.1
        while fb < 0:
            b += step
            step *= 2
            fb = f(b)
        out[k] = math.exp(brentq(f, a, b, xtol=1e-14, rtol=rtol * 1e-2))
    return out.reshape(np.shape(y)) if np.ndim(y) else float(out[0])


# -- ratio and equivalence checks ------------------------------------------------

class Regime(str, Enum):
    AT_ZERO = "at-zero"
    AT_INFINITY = "at-infinity"


class Equivalence(str, Enum):
    PSI_OVER_PI_AT_INF = "psi/pi@inf"
    PSI_OVER_PI_AT_ZERO = "psi/pi@zero"
    SIGMA_HAT_OVER_PHI_AT_ZERO = "sigmahat/phi@zero"
    SIGMA_HAT_OVER_PHI_AT_INF = "sigmahat/phi@inf"


@dataclass
class RatioReport:
    quantity: str
    regime: Regime
    pair: tuple[float, float]
    eps: float
    n_pairs: int
    n_violations: int
    worst: float  # largest exponent-space excursion outside the band
    passed: bool


@dataclass
class EquivalenceReport:
    which: Equivalence
    lo: float
    hi: float
    decade_min: tuple[float, float]
    decade_max: tuple[float, float]
    drift: float
    passed: bool
    grid: np.ndarray = field(repr=False, default=None)
    ratio: np.ndarray = field(repr=False, default=None)


def _regime_points(grid: np.ndarray, regime: Regime, decades: float) -> np.ndarray:
    lg = np.log10(grid)
    if regime is Regime.AT_ZERO:
        return grid[lg <= lg[0] + decades + 1e-9]
    return grid[lg >= lg[-1] - decades - 1e-9]


def check_ratio_control(table, regime, exponent_pair, quantity: str = "pi",
                        eps: float = 0.01, decades: float = 3.0, stride: int = 2) -> RatioReport:
    """Check (x/y)^{hi+ε} <= q(x)/q(y) <= (x/y)^{lo-ε} for grid pairs x < y.

    ``quantity`` is ``pi`` (λ-side, ExponentTable) or ``phi`` (x-side, VariogramTable).
    """
    regime = Regime(regime)
    lo, hi = exponent_pair
    if quantity == "pi":
        et = table if isinstance(table, ExponentTable) else table.exponent
        g = _regime_points(et.lam, regime, decades)[::stride]
        q = pi_fn(et.model, g)
    elif quantity == "phi":
        if not isinstance(table, VariogramTable):
            raise TypeError("phi ratio control needs a VariogramTable")
        g = _regime_points(table.x, regime, decades)[::stride]
        q = phi_fn(table.exponent, g)
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    i, j = np.triu_indices(g.size, k=1)
    lr = np.log(g[i] / g[j])  # < 0
    lq = np.log(q[i] / q[j])
    # exponent implied by each pair; the band is [lo-ε, hi+ε]
    e = lq / lr
    lo_b = -math.inf if lo == 0 else lo - eps
    hi_b = math.inf if math.isinf(hi) else hi + eps
    viol = (e < lo_b - 1e-12) | (e > hi_b + 1e-12)
    worst = float(np.max(np.maximum(lo_b - e, e - hi_b), initial=0.0))
    return RatioReport(quantity, regime, (lo, hi), eps, int(lr.size), int(viol.sum()),
                       max(worst, 0.0), not viol.any())


def _decades(ratio_grid, ratio, toward_zero: bool):
    lg = np.log10(ratio_grid)
    if toward_zero:
        d0 = lg <= lg[0] + 1 + 1e-9
        d1 = (lg >= lg[0] + 1 - 1e-9) & (lg <= lg[0] + 2 + 1e-9)
    else:
        d0 = lg >= lg[-1] - 1 - 1e-9
        d1 = (lg <= lg[-1] - 1 + 1e-9) & (lg >= lg[-1] - 2 - 1e-9)
    return (ratio[d0].min(), ratio[d1].min()), (ratio[d0].max(), ratio[d1].max())


def check_equivalence(table, which, drift_limit: float = 0.2) -> EquivalenceReport:
    """Bounded ratio over the last two decades of the regime with small drift between them."""
    which = Equivalence(which)
    if which in (Equivalence.PSI_OVER_PI_AT_INF, Equivalence.PSI_OVER_PI_AT_ZERO):
        et = table if isinstance(table, ExponentTable) else table.exponent
        grid = et.lam
        if not et.model.bands:
            ratio = et.psi_vals / grid**2  # pure Gaussian: compare with λ² instead
        else:
            ratio = et.psi_vals / et.pi_vals
        zero = which is Equivalence.PSI_OVER_PI_AT_ZERO
    else:
        if not isinstance(table, VariogramTable):
            raise TypeError("σ̂₀²/φ equivalence needs a VariogramTable")
        grid = table.x
        ratio = table.sigma0_hat_sq / table.phi
        zero = which is Equivalence.SIGMA_HAT_OVER_PHI_AT_ZERO
    mins, maxs = _decades(grid, ratio, zero)
    drift = max(abs(mins[0] - mins[1]) / mins[1], abs(maxs[0] - maxs[1]) / maxs[1])
    lo, hi = float(min(mins)), float(max(maxs))
    ok = bool(np.isfinite(hi) and lo > 0 and drift < drift_limit)
    return EquivalenceReport(which, lo, hi, tuple(map(float, mins)), tuple(map(float, maxs)),
                             float(drift), ok, grid, ratio)
