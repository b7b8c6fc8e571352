"""Symmetric Lévy measures with density 1/θ, tail masses and ratio indices.

Every model is reduced to a tiling of (0, ∞) by power bands, θ(x) = c·x^p on
(lo, hi].  Tail masses, truncated moments and inverse tails then have closed
forms band by band, so nothing in this module needs adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Band",
    "Sidedness",
    "LevyModel",
    "ConditionIndices",
    "MeasureError",
    "tail_mass",
    "condition_ratio",
    "estimate_indices",
    "stable",
    "piecewise",
    "tabulated",
    "gaussian_only",
    "dyadic_alternating",
    "switching_exponent",
    "switching_sequence",
]

_FLOOR = 1e-30  # breakpoint sequences stop once they fall below this


class MeasureError(ValueError):
    """Raised for inadmissible or non-integrable measures."""


class Sidedness(str, Enum):
    ONE_SIDED = "one-sided"
    TWO_SIDED = "two-sided"


@dataclass(frozen=True)
class Band:
    """θ(x) = c·x^p on (lo, hi]."""

    c: float
    p: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise MeasureError(f"band coefficient must be positive, got {self.c}")
        if not (0 <= self.lo < self.hi):
            raise MeasureError(f"band interval must satisfy 0 <= lo < hi, got ({self.lo}, {self.hi}]")

    def density(self, x):
        return np.power(x, -self.p) / self.c

    def antideriv_tail(self, x):
        """∫_x^hi of the density, for lo <= x <= hi (vectorized)."""
        x = np.asarray(x, dtype=float)
        q = 1.0 - self.p
        if abs(q) < 1e-14:
            return np.log(self.hi / x) / self.c
        hi_term = 0.0 if math.isinf(self.hi) else self.hi**q
        if math.isinf(self.hi) and q >= 0:
            raise MeasureError("measure not integrable at infinity")
        with np.errstate(divide="ignore"):
            return (np.power(x, q) - hi_term) / (self.c * (-q))

    def mass(self) -> float:
        if self.lo == 0:
            if self.p >= 1:
                return math.inf
        return float(self.antideriv_tail(max(self.lo, 0.0)))

    def moment2(self, a: float, b: float) -> float:
        """∫_a^b x² · density, for lo <= a < b <= hi."""
        q = 3.0 - self.p
        if abs(q) < 1e-14:
            return math.log(b / a) / self.c
        a_t = 0.0 if a == 0 else a**q
        if a == 0 and q <= 0:
            return math.inf
        return (b**q - a_t) / (self.c * q)


@dataclass(frozen=True)
class LevyModel:
    """Declarative symmetric Lévy measure ν(dx) = dx/θ(|x|) plus a Gaussian part A.

    ``kind`` is one of ``stable``, ``piecewise``, ``tabulated``, ``gaussian``,
    ``dyadic-alternating`` or ``switching-exponent``; ``bands`` always holds
    the resolved band tiling, ordered from 0 outward.
    """

    kind: str
    bands: tuple[Band, ...]
    gaussian_coef: float = 0.0
    sidedness: Sidedness = Sidedness.ONE_SIDED
    alpha: float | None = None
    params: dict = field(default_factory=dict, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.gaussian_coef < 0:
            raise MeasureError("gaussian_coef must be nonnegative")
        object.__setattr__(self, "sidedness", Sidedness(self.sidedness))
        bands = self.bands
        if not bands:
            if self.gaussian_coef <= 0:
                raise MeasureError("model has neither jumps nor a Gaussian part")
            return
        if bands[0].lo != 0 or not math.isinf(bands[-1].hi):
            raise MeasureError("bands must tile (0, inf)")
        for b0, b1 in zip(bands[:-1], bands[1:]):
            if not math.isclose(b0.hi, b1.lo, rel_tol=1e-12):
                raise MeasureError(f"bands overlap or leave a gap at {b0.hi} / {b1.lo}")
        if bands[0].p >= 3:
            raise MeasureError("∫ min(1,x²) ν(dx) diverges at 0")
        if bands[-1].p <= 1:
            raise MeasureError("measure not integrable at infinity")
        # cumulative tail at each band's lower edge, from the outside in
        tails = np.zeros(len(bands) + 1)
        for i in range(len(bands) - 1, 0, -1):
            tails[i] = tails[i + 1] + bands[i].mass()
        tails[0] = math.inf
        object.__setattr__(self, "_edges", np.array([b.lo for b in bands] + [math.inf]))
        object.__setattr__(self, "_tails", tails)

    # -- band lookup --------------------------------------------------------
    @property
    def has_jumps(self) -> bool:
        return bool(self.bands)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([b.lo for b in self.bands[1:]])

    def _band_index(self, x: np.ndarray) -> np.ndarray:
        # band i covers (lo_i, hi_i]
        return np.clip(np.searchsorted(self._edges, x, side="left") - 1, 0, len(self.bands) - 1)

    def theta(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        if not self.bands:
            return np.full_like(x, np.inf)
        idx = self._band_index(x)
        c = np.array([b.c for b in self.bands])[idx]
        p = np.array([b.p for b in self.bands])[idx]
        return c * np.power(x, p)

    def density(self, x):
        return 1.0 / self.theta(x)

    def one_sided_tail(self, x):
        """∫_x^∞ dz/θ(z), vectorized over x > 0."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0):
            raise MeasureError("tail mass needs x > 0")
        if not self.bands:
            return np.zeros_like(xa)
        idx = np.atleast_1d(self._band_index(xa))
        xs = np.atleast_1d(xa)
        out = np.empty(xs.shape)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = self.bands[i].antideriv_tail(xs[sel]) + self._tails[i + 1]
        return out.reshape(xa.shape) if xa.ndim else float(out[0])

    def tail_factor(self) -> float:
        return 2.0 if self.sidedness is Sidedness.TWO_SIDED else 1.0

    def small_jump_variance(self, eps: float) -> float:
        """∫_0^ε x²/θ(x) dx: the per-unit-time variance of the jumps below ε.

        The process with exponent ∫_0^∞ (1 - cos xλ) dx/θ(x) puts half of this
        mass on each sign, so no doubling here.
        """
        tot = 0.0
        for b in self.bands:
            if b.lo >= eps:
                break
            tot += b.moment2(b.lo, min(b.hi, eps))
        return tot

    def inverse_tail(self, m):
        """Solve one_sided_tail(x) = m for x, vectorized over m > 0."""
        m = np.asarray(m, dtype=float)
        tails = self._tails
        # band i holds tails in [tails[i+1], tails[i])
        idx = np.clip(np.searchsorted(-tails, -m, side="right") - 1, 0, len(self.bands) - 1)
        out = np.empty(m.shape)
        for i in np.unique(idx):
            sel = idx == i
            b = self.bands[i]
            r = m[sel] - tails[i + 1]
            q = 1.0 - b.p
            if abs(q) < 1e-14:
                out[sel] = b.hi * np.exp(-b.c * r)
            else:
                hi_term = 0.0 if math.isinf(b.hi) else b.hi**q
                out[sel] = np.power(hi_term - b.c * q * r, 1.0 / q)
        return out

    def scaled(self, factor: float) -> "LevyModel":
        """Multiply the density by ``factor`` (θ is divided by it)."""
        bands = tuple(Band(b.c / factor, b.p, b.lo, b.hi) for b in self.bands)
        return LevyModel(self.kind, bands, self.gaussian_coef, self.sidedness, self.alpha,
                         dict(self.params), self.name)

    def with_sidedness(self, sidedness) -> "LevyModel":
        return LevyModel(self.kind, self.bands, self.gaussian_coef, Sidedness(sidedness),
                         self.alpha, dict(self.params), self.name)


# -- constructors -----------------------------------------------------------

def stable(alpha: float, scale: float = 1.0, gaussian_coef: float = 0.0,
           sidedness=Sidedness.ONE_SIDED, name: str = "") -> LevyModel:
    """Symmetric α-stable measure with density x^{-α-1}/scale."""
    if not 0 < alpha < 2:
        raise MeasureError("stable index must lie in (0, 2)")
    return LevyModel("stable", (Band(scale, alpha + 1.0, 0.0, math.inf),), gaussian_coef,
                     sidedness, alpha, {"alpha": alpha, "scale": scale}, name or f"stable({alpha:g})")


def piecewise(bands: Sequence[Band | dict | tuple], gaussian_coef: float = 0.0,
              sidedness=Sidedness.ONE_SIDED, name: str = "piecewise") -> LevyModel:
    out = []
    for b in bands:
        if isinstance(b, Band):
            out.append(b)
        elif isinstance(b, dict):
            out.append(Band(float(b["c"]), float(b["p"]), float(b["lo"]), float(b["hi"])))
        else:
            out.append(Band(*map(float, b)))
    out.sort(key=lambda b: b.lo)
    return LevyModel("piecewise", tuple(out), gaussian_coef, sidedness, None, {}, name)


def tabulated(knots: Iterable[tuple[float, float]], gaussian_coef: float = 0.0,
              sidedness=Sidedness.ONE_SIDED, name: str = "tabulated") -> LevyModel:
    """Density given at knots (x, 1/θ(x)), interpolated linearly in log-log space.

    Log-log interpolation is exactly a power band between consecutive knots,
    and the end segments are extended as powers toward 0 and ∞.
    """
    k = np.array(sorted(knots), dtype=float)
    if k.ndim != 2 or k.shape[0] < 2:
        raise MeasureError("need at least two knots")
    if np.any(k <= 0):
        raise MeasureError("knots and density values must be positive")
    lx, ld = np.log(k[:, 0]), np.log(k[:, 1])
    slopes = np.diff(ld) / np.diff(lx)  # density ~ x^slope, so p = -slope
    bands = []
    edges = np.concatenate([[0.0], k[1:-1, 0], [math.inf]])
    for i, s in enumerate(slopes):
        x0 = k[i, 0]
        c = x0**s / k[i, 1]  # density d0·(x/x0)^s, so θ = (x0^s/d0)·x^{-s}
        bands.append(Band(c, -s, edges[i], edges[i + 1]))
    return LevyModel("tabulated", tuple(bands), gaussian_coef, sidedness, None,
                     {"knots": k.tolist()}, name)


def gaussian_only(gaussian_coef: float = 1.0, name: str = "brownian") -> LevyModel:
    return LevyModel("gaussian", (), gaussian_coef, Sidedness.ONE_SIDED, None, {}, name)


def dyadic_alternating(c1: float = 1.0, c2: float = 1.2, alpha: float = 1.5,
                       depth: float = _FLOOR, sidedness=Sidedness.ONE_SIDED,
                       name: str = "example51") -> LevyModel:
    """θ = c₁x^{α+1} on (2^{-2k-2}, 2^{-2k-1}], c₂x^{α+1} on (2^{-2k-1}, 2^{-2k}].

    Above 1 the c₂ branch is continued.
    """
    n_max = int(math.ceil(-math.log2(depth)))
    p = alpha + 1.0
    bands = [Band(c2, p, 1.0, math.inf)]
    for n in range(n_max):
        coef = c2 if n % 2 == 0 else c1  # (b_{n+1}, b_n]
        bands.append(Band(coef, p, 2.0 ** -(n + 1), 2.0 ** -n))
    last = bands[-1]
    bands.append(Band(c2 if n_max % 2 == 0 else c1, p, 0.0, last.lo))
    return LevyModel("dyadic-alternating", tuple(sorted(bands, key=lambda b: b.lo)), 0.0,
                     sidedness, alpha, {"c1": c1, "c2": c2, "alpha": alpha}, name)


def _power_integral(p: float, a: float, b: float) -> float:
    """∫_a^b x^{-p} dx."""
    q = 1.0 - p
    return (b**q - a**q) / q


def switching_sequence(alpha1: float, alpha2: float, slack: float = 0.99,
                       floor: float = _FLOOR) -> list[float]:
    """Breakpoints b₀ = 1 > b₁ = 1/2 > b₂ > … for the switching-exponent model.

    b_{2k} = b_{2k-1}/(k+1) and b_{2k+1} is the smallest value in (0, b_{2k})
    for which both band constraints hold with the given slack.
    """
    if not 1 < alpha1 < alpha2 < 2:
        raise MeasureError("need 1 < alpha1 < alpha2 < 2")
    b = [1.0, 0.5]
    k = 1
    while b[-1] > floor:
        b2k = b[-1] / (k + 1)
        b.append(b2k)
        prev_mass = _power_integral(alpha1 + 1, b2k, b[-2])  # ∫_{b_{2k}}^{b_{2k-1}} x^{-α1-1}

        def excess(y):
            # both ratios grow as y moves away from b_{2k}
            r1 = _power_integral(alpha2 + 1, y, b2k) / prev_mass
            r2 = _power_integral(alpha2 - 1, y, b2k) / (y ** (2 - alpha1) / (2 - alpha1))
            return max(r1, r2)

        lo, hi = math.log(b2k) - 200.0, math.log(b2k)
        if excess(math.exp(lo)) <= slack:
            y = math.exp(lo)
        else:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if excess(math.exp(mid)) <= slack:
                    hi = mid
                else:
                    lo = mid
            y = math.exp(hi)
        if y >= b2k * (1 - 1e-9):
            break  # the next band would be narrower than rounding: stop here
        b.append(y)
        k += 1
    return b


def switching_exponent(alpha1: float = 1.3, alpha2: float = 1.7, slack: float = 0.99,
                       floor: float = _FLOOR, sidedness=Sidedness.ONE_SIDED,
                       name: str = "example52") -> LevyModel:
    """θ = x^{α₂+1} on (b_{2k+1}, b_{2k}] and x^{α₁+1} on (b_{2k+2}, b_{2k+1}].

    Above 1 the α₁ branch is continued.
    """
    b = switching_sequence(alpha1, alpha2, slack, floor)
    bands = [Band(1.0, alpha1 + 1, 1.0, math.inf)]
    for n in range(len(b) - 1):
        p = alpha2 + 1 if n % 2 == 0 else alpha1 + 1
        bands.append(Band(1.0, p, b[n + 1], b[n]))
    bands.append(Band(1.0, alpha2 + 1 if (len(b) - 1) % 2 == 0 else alpha1 + 1, 0.0, b[-1]))
    bands.sort(key=lambda bd: bd.lo)
    return LevyModel("switching-exponent", tuple(bands), 0.0, sidedness, None,
                     {"alpha1": alpha1, "alpha2": alpha2, "slack": slack, "sequence": b}, name)


# -- operations -------------------------------------------------------------

def tail_mass(model: LevyModel, x):
    """ν̄(x): ∫_x^∞ ν (one-sided) or ν(|z| ≥ x) (two-sided)."""
    return model.tail_factor() * model.one_sided_tail(x)


def condition_ratio(model: LevyModel, x):
    """(x/θ(x)) / ν̄(x)."""
    t = tail_mass(model, x)
    if np.any(np.asarray(t) <= 0):
        raise MeasureError("ratio undefined: zero tail mass")
    return np.asarray(x, dtype=float) * model.density(x) / t


@dataclass(frozen=True)
class ConditionIndices:
    alpha_lo: float
    alpha_hi: float
    beta_lo: float
    beta_hi: float
    c1_ok: bool
    c2_ok: bool
    grid_zero: np.ndarray = field(repr=False)
    grid_inf: np.ndarray = field(repr=False)
    drift_zero: float = 0.0
    drift_inf: float = 0.0
    decade_max_zero: tuple = ()
    decade_max_inf: tuple = ()


def _augment(model: LevyModel, grid: np.ndarray) -> np.ndarray:
    """Add both one-sided limits at every breakpoint inside the grid range."""
    g = np.asarray(grid, dtype=float)
    bp = model.breakpoints if model.bands else np.empty(0)
    bp = bp[(bp >= g.min()) & (bp <= g.max())]
    return np.unique(np.concatenate([g, bp, bp * (1 + 1e-12)]))


def _decade_stats(x: np.ndarray, r: np.ndarray, toward_zero: bool):
    lx = np.log10(x)
    edge = lx.min() if toward_zero else lx.max()
    n_dec = int(math.floor(lx.max() - lx.min() + 1e-9))
    mins, maxs = [], []
    for d in range(n_dec):
        if toward_zero:
            sel = (lx >= edge + d) & (lx <= edge + d + 1)
        else:
            sel = (lx <= edge - d) & (lx >= edge - d - 1)
        mins.append(r[sel].min())
        maxs.append(r[sel].max())
    return mins, maxs  # index 0 is the decade closest to the limit point


def _indices_one(model, grid, toward_zero):
    x = _augment(model, grid)
    r = condition_ratio(model, x)
    mins, maxs = _decade_stats(x, r, toward_zero)
    lo, hi = mins[0], maxs[0]
    drift = max(abs(mins[0] - mins[1]) / mins[1], abs(maxs[0] - maxs[1]) / maxs[1])
    # ratio escaping: the largest values sit in the decade nearest the limit
    # point and dwarf those of the farthest decade
    unbounded = maxs[0] >= 2.0 and maxs[0] >= max(maxs) and maxs[0] > 1.5 * maxs[-1]
    ok = (not unbounded) and lo > 1.0 and hi < 2.0
    if unbounded:
        hi = math.inf
    return lo, hi, ok, drift, tuple(maxs)


def estimate_indices(model: LevyModel, probe_grid_zero=None, probe_grid_inf=None) -> ConditionIndices:
    """Last-decade extrema of the condition ratio near 0 and near ∞."""
    if probe_grid_zero is None:
        probe_grid_zero = np.logspace(-16, -8, 8 * 16 + 1)
    if probe_grid_inf is None:
        probe_grid_inf = np.logspace(4, 12, 8 * 16 + 1)
    for g in (probe_grid_zero, probe_grid_inf):
        g = np.asarray(g)
        if g.size < 32 or math.log10(g.max() / g.min()) < 4 - 1e-9:
            raise MeasureError("probe grids need >= 32 points spanning >= 4 decades")
    a_lo, a_hi, c1, dz, mz = _indices_one(model, probe_grid_zero, True)
    b_lo, b_hi, c2, di, mi = _indices_one(model, probe_grid_inf, False)
    return ConditionIndices(a_lo, a_hi, b_lo, b_hi, c1, c2, np.asarray(probe_grid_zero),
                            np.asarray(probe_grid_inf), dz, di, mz, mi)
