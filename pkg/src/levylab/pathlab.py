"""Path simulation, binned local times, inverse local time and favorite points.

Two simulation modes:

* ``exact``: self-similar models (pure stable, pure Gaussian).  Increments are
  drawn from the exact law (Chambers-Mallows-Stuck for stable).  Ensembles
  additionally use *scale acceleration*: away from the window |x| ≤ M a step
  from x lasts dt·m^α and moves m times a unit-window increment, m = |x|/M,
  which by self-similarity is still an exact draw.
* ``cp``: any model.  Jumps above ε are compound Poisson with rate
  ∫_ε^∞ dx/θ and a random sign; smaller jumps and the Gaussian part are
  replaced by a matched Brownian term.

The hot loop (occupation deposit plus stopping) lives in ``_kernels``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exponent as ex
from . import gaussian as gs
from ._kernels import (BACKEND, STATUS_BUDGET, STATUS_LEVEL, STATUS_RUNNING,
                       STATUS_TIME, walk_block)
from .measure import LevyModel
from .stats import ks_distance, mean_se, median_ci

__all__ = [
    "PathError",
    "PathRecord",
    "LocalTimeField",
    "FavoriteSample",
    "WalkSpec",
    "Ensemble",
    "BACKEND",
    "exact_mode_available",
    "stable_variates",
    "sample_endpoint",
    "simulate_path",
    "local_time",
    "occupation_at",
    "inverse_local_time",
    "favorite_point",
    "run_ensemble",
    "RayKnightReport",
    "verify_rayknight",
    "LevelSummary",
    "upper_statistic",
    "lower_statistic",
    "favorite_ratio",
    "PolarityReport",
    "polarity_ratio_check",
]

JUMP_BUDGET = 1e8
BLOCK = 1 << 15
_TAG_PATH = 61
_TAG_ENDPOINT = 67


class PathError(ValueError):
    pass


def _stream(seed: int, tag: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, k)))


# -- increment laws ---------------------------------------------------------

def exact_mode_available(model: LevyModel) -> bool:
    if not model.has_jumps:
        return True
    return model.kind == "stable" and model.gaussian_coef == 0 and len(model.bands) == 1


def _self_similar_index(model: LevyModel) -> tuple[float, float]:
    """(α, ψ(1)) for an exact-mode model, ψ(λ) = ψ(1)|λ|^α."""
    if not model.has_jumps:
        return 2.0, model.gaussian_coef ** 2
    alpha = model.bands[0].p - 1.0
    return alpha, float(ex.psi(model, 1.0))


def stable_variates(rng: np.random.Generator, alpha: float, n: int) -> np.ndarray:
    """Symmetric α-stable with E e^{iλS} = e^{-|λ|^α} (Chambers-Mallows-Stuck)."""
    if alpha == 2.0:
        return math.sqrt(2.0) * rng.standard_normal(n)
    u = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n)
    w = rng.standard_exponential(n)
    if alpha == 1.0:
        return np.tan(u)
    return (np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha))


@dataclass(frozen=True)
class _CPLaw:
    rate: float
    tail_eps: float
    sigma2: float
    eps: float


def _cp_law(model: LevyModel, eps_jump: float) -> _CPLaw:
    if eps_jump <= 0:
        raise PathError("eps_jump must be positive")
    rate = float(model.one_sided_tail(eps_jump)) if model.has_jumps else 0.0
    sigma2 = (model.small_jump_variance(eps_jump) if model.has_jumps else 0.0) \
        + 2.0 * model.gaussian_coef ** 2
    return _CPLaw(rate, rate, sigma2, eps_jump)


def _jump_sizes(model: LevyModel, law: _CPLaw, rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 0:
        return np.empty(0)
    # inverse CDF of the normalized tail; 1 - U avoids a zero argument
    mag = model.inverse_tail(law.tail_eps * (1.0 - rng.random(n)))
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * np.maximum(mag, law.eps)


def _cp_increments(model: LevyModel, law: _CPLaw, rng: np.random.Generator,
                   dt: float, n: int) -> np.ndarray:
    inc = math.sqrt(law.sigma2 * dt) * rng.standard_normal(n)
    if law.rate > 0:
        counts = rng.poisson(law.rate * dt, n)
        tot = int(counts.sum())
        if tot:
            owner = np.repeat(np.arange(n), counts)
            inc += np.bincount(owner, weights=_jump_sizes(model, law, rng, tot), minlength=n)
    return inc


def sample_endpoint(model: LevyModel, horizon: float, n: int, seed: int = 0,
                    mode: str = "auto", eps_jump: float = 1e-3) -> np.ndarray:
    """n independent draws of X_horizon (no skeleton needed)."""
    mode = _resolve_mode(model, mode)
    rng = _stream(seed, _TAG_ENDPOINT, 0 if mode == "exact" else 1)
    if horizon == 0:
        return np.zeros(n)
    if mode == "exact":
        alpha, c = _self_similar_index(model)
        return (c * horizon) ** (1.0 / alpha) * stable_variates(rng, alpha, n)
    law = _cp_law(model, eps_jump)
    if law.rate * horizon * n > JUMP_BUDGET:
        raise PathError(f"eps_jump={eps_jump:g} needs ~{law.rate * horizon * n:.3g} jumps")
    return _cp_increments(model, law, rng, horizon, n)


def _resolve_mode(model: LevyModel, mode: str) -> str:
    if mode == "auto":
        return "exact" if exact_mode_available(model) else "cp"
    if mode == "exact" and not exact_mode_available(model):
        raise PathError(f"exact mode needs a pure stable or Gaussian model, got {model.kind}")
    if mode not in ("exact", "cp"):
        raise PathError(f"unknown mode {mode!r}")
    return mode


# -- single paths -----------------------------------------------------------

@dataclass
class PathRecord:
    """Skeleton X(k·dt), k = 0..n, plus the ledger of jumps above ε."""

    horizon: float
    dt: float
    eps_jump: float | None
    sigma2: float
    seed: int
    mode: str
    times: np.ndarray
    positions: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))


def simulate_path(model: LevyModel, horizon: float, eps_jump: float | None = 1e-3,
                  dt: float = 1e-3, seed: int = 0, mode: str = "auto") -> PathRecord:
    if horizon < 0 or dt <= 0:
        raise PathError("need horizon >= 0 and dt > 0")
    mode = _resolve_mode(model, mode)
    rng = _stream(seed, _TAG_PATH, 0)
    nsteps = int(math.ceil(horizon / dt - 1e-9)) if horizon > 0 else 0
    times = np.minimum(np.arange(nsteps + 1) * dt, horizon)
    steps = np.diff(times)
    if mode == "exact":
        alpha, c = _self_similar_index(model)
        inc = (c * steps) ** (1.0 / alpha) * stable_variates(rng, alpha, nsteps)
        pos = np.concatenate([[0.0], np.cumsum(inc)])
        return PathRecord(horizon, dt, None, 0.0, seed, mode, times, pos)
    law = _cp_law(model, eps_jump if eps_jump else 1e-3)
    if law.rate * horizon > JUMP_BUDGET:
        raise PathError(f"eps_jump={law.eps:g} gives ~{law.rate * horizon:.3g} jumps (> {JUMP_BUDGET:g})")
    nj = rng.poisson(law.rate * horizon) if horizon > 0 else 0
    jt = np.sort(rng.uniform(0.0, horizon, nj))
    js = _jump_sizes(model, law, rng, nj)
    diff = np.sqrt(law.sigma2 * steps) * rng.standard_normal(nsteps)
    # jumps at time s belong to the step ending at the first grid time >= s
    owner = np.clip(np.searchsorted(times, jt, side="left"), 1, max(nsteps, 1)) - 1
    diff += np.bincount(owner, weights=js, minlength=nsteps)[:nsteps]
    pos = np.concatenate([[0.0], np.cumsum(diff)])
    return PathRecord(horizon, dt, law.eps, law.sigma2, seed, mode, times, pos, jt, js)


@dataclass
class LocalTimeField:
    """Binned occupation of one skeleton; bins are centered at j·width."""

    record: PathRecord
    width: float
    centers: np.ndarray
    checkpoints: np.ndarray
    occupation: np.ndarray  # (n_checkpoints, n_bins) occupation time
    outside: np.ndarray  # occupation time outside the binned window
    zero_trace: np.ndarray  # zero-bin occupation at each skeleton time

    @property
    def local_times(self) -> np.ndarray:
        return self.occupation / self.width

    @property
    def zero_index(self) -> int:
        return int(np.argmin(np.abs(self.centers)))


def _bin_index(x: np.ndarray, width: float) -> np.ndarray:
    return np.floor(x / width + 0.5).astype(np.int64)


def local_time(record: PathRecord, bin_width: float, checkpoints=None,
               support: tuple[float, float] | None = None) -> LocalTimeField:
    """Left-point occupation of each skeleton step, per checkpoint time."""
    if bin_width <= 0:
        raise PathError("bin_width must be positive")
    ck = np.atleast_1d(np.asarray([record.horizon] if checkpoints is None else checkpoints, float))
    if np.any(ck < 0) or np.any(ck > record.horizon * (1 + 1e-12)):
        raise PathError("checkpoints must lie in [0, horizon]")
    idx = _bin_index(record.positions[:-1], bin_width)
    if support is None:
        lo = min(int(idx.min()) if idx.size else 0, 0)
        hi = max(int(idx.max()) if idx.size else 0, 0)
    else:
        lo, hi = (int(math.floor(s / bin_width + 0.5)) for s in support)
    centers = np.arange(lo, hi + 1) * bin_width
    nb = centers.size
    t0, t1 = record.times[:-1], record.times[1:]
    inside = (idx >= lo) & (idx <= hi)
    occ = np.zeros((ck.size, nb))
    out = np.zeros(ck.size)
    for i, c in enumerate(ck):
        d = np.clip(np.minimum(t1, c) - t0, 0.0, None)
        occ[i] = np.bincount(idx[inside] - lo, weights=d[inside], minlength=nb)
        out[i] = d[~inside].sum()
    z = np.where(idx == 0, t1 - t0, 0.0)
    zero_trace = np.concatenate([[0.0], np.cumsum(z)])
    return LocalTimeField(record, bin_width, centers, ck, occ, out, zero_trace)


def occupation_at(fld: LocalTimeField, t: float) -> np.ndarray:
    """Occupation vector at an arbitrary time t (not just checkpoints)."""
    hit = np.flatnonzero(np.isclose(fld.checkpoints, t, rtol=0, atol=1e-15))
    if hit.size:
        return fld.occupation[hit[0]]
    return local_time(fld.record, fld.width, [t],
                      (fld.centers[0], fld.centers[-1])).occupation[0]


def inverse_local_time(fld: LocalTimeField, t_level: float) -> float:
    """First time the zero-bin local time exceeds t_level; +inf if never (censored).

    Occupation accrues at unit rate while the skeleton sits in the zero bin,
    so the crossing time inside a step is exact for the skeleton.
    """
    target = t_level * fld.width
    tr = fld.zero_trace
    k = int(np.searchsorted(tr, target, side="right"))
    if k >= tr.size:
        return math.inf
    # step k-1 carries the crossing
    return float(fld.record.times[k - 1] + (target - tr[k - 1]))


@dataclass(frozen=True)
class FavoriteSample:
    t: float
    V: float
    L_star: float
    L_zero: float
    at_inverse_time: bool = False


def _favorite_from(occ: np.ndarray, centers: np.ndarray):
    m = occ.max()
    cand = np.flatnonzero(occ == m)
    key = np.lexsort((centers[cand] < 0, np.abs(centers[cand])))
    return int(cand[key[0]]), float(m)


def favorite_point(fld: LocalTimeField, t: float, at_inverse_time: bool = False) -> FavoriteSample:
    """Argmax bin of the local time at t; ties go to the smallest |center|, then to x >= 0."""
    occ = occupation_at(fld, t)
    j, m = _favorite_from(occ, fld.centers)
    return FavoriteSample(t, float(fld.centers[j]), m / fld.width,
                          float(occ[fld.zero_index]) / fld.width, at_inverse_time)


# -- ensembles through the compiled kernel ----------------------------------

@dataclass(frozen=True)
class WalkSpec:
    """Geometry and stopping rule for an ensemble.

    Bins are centered at j·width for j = -half_bins..half_bins.  The walk
    stops when the zero-bin local time exceeds ``stop_level`` (if given) or
    at ``t_end``, whichever comes first; ``max_steps`` censors.
    """

    width: float
    half_bins: int
    dt: float
    accel_window: float = math.inf
    stop_level: float | None = None
    t_end: float = math.inf
    max_steps: int = 50_000_000
    mode: str = "auto"
    eps_jump: float = 1e-3

    @property
    def centers(self) -> np.ndarray:
        return np.arange(-self.half_bins, self.half_bins + 1) * self.width


@dataclass
class Ensemble:
    spec: WalkSpec
    occupation: np.ndarray  # (n_paths, n_bins)
    time: np.ndarray  # stopping time reached
    status: np.ndarray
    outside: np.ndarray
    steps: np.ndarray
    seed: int

    @property
    def local_times(self) -> np.ndarray:
        return self.occupation / self.spec.width

    @property
    def zero_index(self) -> int:
        return self.spec.half_bins

    @property
    def censored(self) -> np.ndarray:
        return self.status == STATUS_BUDGET


def run_ensemble(model: LevyModel, n_paths: int, spec: WalkSpec, seed: int = 0,
                 tag: int = _TAG_PATH) -> Ensemble:
    """Independent paths with private occupation arrays; path i uses stream (seed, tag, i)."""
    mode = _resolve_mode(model, spec.mode)
    if mode == "exact":
        alpha, c = _self_similar_index(model)
        scale = (c * spec.dt) ** (1.0 / alpha)
        accel = spec.accel_window
    else:
        law = _cp_law(model, spec.eps_jump)
        alpha, accel = 1.0, math.inf  # no acceleration without self-similarity
    nb = 2 * spec.half_bins + 1
    x_lo = -(spec.half_bins + 0.5) * spec.width
    stop_occ = -1.0 if spec.stop_level is None else spec.stop_level * spec.width
    occ = np.zeros((n_paths, nb))
    res = np.zeros((n_paths, 4))
    status = np.zeros(n_paths, dtype=np.int8)
    for i in range(n_paths):
        rng = _stream(seed, tag, i)
        state = np.zeros(4)
        row = occ[i]
        st = STATUS_RUNNING
        while st == STATUS_RUNNING:
            if mode == "exact":
                inc = scale * stable_variates(rng, alpha, BLOCK)
            else:
                inc = _cp_increments(model, law, rng, spec.dt, BLOCK)
            st, _ = walk_block(inc, state, row, spec.dt, alpha, accel, x_lo, spec.width,
                               spec.half_bins, stop_occ, spec.t_end, float(spec.max_steps))
        status[i] = st
        res[i] = state
    return Ensemble(spec, occ, res[:, 1], status, res[:, 2], res[:, 3], seed)


# -- Ray-Knight isomorphism --------------------------------------------------

@dataclass
class RayKnightReport:
    t_level: float
    sites: np.ndarray
    ks: np.ndarray
    ks_pvalue: np.ndarray
    mean_L: np.ndarray
    mean_L_se: np.ndarray
    mean_rel_err: np.ndarray
    second_moment_lhs: np.ndarray
    second_moment_rhs: np.ndarray
    censored_fraction: float
    max_overshoot: float
    n_paths: int
    seed: int
    note: str = ""

    def passed(self, ks_tol: float = 0.1, mean_tol: float = 0.05) -> bool:
        nz = self.sites != 0
        return bool(np.all(self.ks[nz] < ks_tol) and np.all(self.mean_rel_err < mean_tol))


def rayknight_spec(model: LevyModel, t_level: float, sites, width: float = 0.01,
                   dt: float | None = None, accel_window: float | None = None) -> WalkSpec:
    reach = float(np.max(np.abs(sites)))
    half = int(math.ceil((reach * 1.5) / width))
    if dt is None:
        dt = 0.005 * t_level * width  # overshoot of L⁰ below 0.5% of t
    return WalkSpec(width, half, dt, accel_window or 2.0 * reach, stop_level=t_level)


def verify_rayknight(model: LevyModel, t_level: float, sites, n_paths: int, seed: int = 0,
                     vtable: ex.VariogramTable | None = None, spec: WalkSpec | None = None
                     ) -> RayKnightReport:
    """Compare L^x_{τ(t)} + η_x²/2 with ½(η_x + √(2t))² site by site."""
    sites = np.unique(np.concatenate([np.asarray(sites, float), -np.asarray(sites, float), [0.0]]))
    vt = vtable or ex.build_variogram(model)
    if not vt.exponent.is_recurrent():
        raise PathError("Ray-Knight check needs a recurrent model")
    spec = spec or rayknight_spec(model, t_level, sites)
    ens = run_ensemble(model, n_paths, spec, seed)
    ok = ~ens.censored
    censored = 1.0 - ok.mean()
    note = "tau censored in more than 10% of paths" if censored > 0.1 else ""
    j = np.rint(sites / spec.width).astype(int) + spec.half_bins
    L = ens.local_times[ok][:, j]
    fld = gs.make_field(vt, sites, seed)
    eta_l = gs.sample(fld, int(ok.sum()), seed, tag=71)
    eta_r = gs.sample(fld, n_paths, seed, tag=73)
    lhs = L + 0.5 * eta_l ** 2
    rhs = 0.5 * (eta_r + math.sqrt(2.0 * t_level)) ** 2
    ks = np.zeros(sites.size)
    pv = np.ones(sites.size)
    mL = np.zeros(sites.size)
    seL = np.zeros(sites.size)
    for k in range(sites.size):
        if sites[k] != 0:
            ks[k], pv[k] = ks_distance(lhs[:, k], rhs[:, k])
        else:
            ks[k] = float(np.max(np.abs(lhs[:, k] - t_level)) / t_level)
        mL[k], seL[k] = mean_se(L[:, k])
    overshoot = float(np.max(ens.local_times[ok][:, spec.half_bins] - t_level) / t_level) if ok.any() else math.nan
    return RayKnightReport(t_level, sites, ks, pv, mL, seL, np.abs(mL - t_level) / t_level,
                           np.mean(lhs ** 2, axis=0), np.mean(rhs ** 2, axis=0),
                           float(censored), overshoot, n_paths, seed, note)


# -- small-time local time statistics -----------------------------------------

@dataclass
class LevelSummary:
    """Monte Carlo distribution of one statistic at one dyadic level."""

    t: float
    median: float
    ci_lo: float
    ci_hi: float
    q10: float
    q90: float
    n: int
    n_censored: int
    n_excluded: int = 0
    scale: float = math.nan  # the spatial scale used (h_a(t), x_t, ...)

    @classmethod
    def of(cls, t, values, n_censored, n_excluded=0, scale=math.nan):
        v = np.asarray(values, float)
        med, lo, hi = median_ci(v)
        q10, q90 = (np.quantile(v, [0.1, 0.9]) if v.size else (math.nan, math.nan))
        return cls(float(t), med, lo, hi, float(q10), float(q90), int(v.size),
                   int(n_censored), int(n_excluded), float(scale))


def trend(series: list[LevelSummary]) -> dict:
    """Monotonicity of medians along the series and separation of endpoint intervals."""
    med = np.array([s.median for s in series])
    d = np.diff(med)
    first, last = series[0], series[-1]
    return {
        "nonincreasing": bool(np.all(d <= 0)),
        "increasing": bool(np.all(d > 0)),
        "endpoints_separated": bool(first.ci_hi < last.ci_lo or last.ci_hi < first.ci_lo),
    }


def h_a(vt: ex.VariogramTable, t: float, a: float) -> float:
    """φ⁻¹(t / (log 1/t)^a)."""
    return float(ex.phi_inv(vt, t / abs(math.log(1.0 / t)) ** a))


def _tau_ensemble(model, t, half_width, width, n_paths, seed, tag, overshoot=0.005):
    half = int(math.ceil(half_width / width))
    spec = WalkSpec(width, half, overshoot * t * width, 2.0 * half_width, stop_level=t)
    return run_ensemble(model, n_paths, spec, seed, tag)


def upper_statistic(model: LevyModel, a: float, t_grid, n_paths: int, gamma: float = 1.0,
                    seed: int = 0, vtable: ex.VariogramTable | None = None) -> list[LevelSummary]:
    """sup_{|x| ≤ h_a(t)} (log 1/t)^γ (L^x_{τ(t)} - t)/t per level."""
    vt = vtable or ex.build_variogram(model)
    out = []
    for i, t in enumerate(t_grid):
        R = h_a(vt, t, a)
        x_t = float(ex.phi_inv(vt, t))
        w = min(R / 8.0, x_t / 20.0)
        ens = _tau_ensemble(model, t, 2.0 * R, w, n_paths, seed, 80 + i)
        ok = ~ens.censored
        j = np.abs(ens.spec.centers) <= R + 1e-12 * R
        stat = abs(math.log(1.0 / t)) ** gamma * (ens.local_times[ok][:, j].max(axis=1) - t) / t
        out.append(LevelSummary.of(t, stat, int((~ok).sum()), scale=R))
    return out


def lower_statistic(model: LevyModel, gamma: float, t_grid, n_paths: int, seed: int = 0,
                    vtable: ex.VariogramTable | None = None, span: float = 8.0
                    ) -> list[LevelSummary]:
    """(log 1/t)^γ (L*_{τ(t)} - t)/t per level; L* is the max over a ±span·x_t window."""
    vt = vtable or ex.build_variogram(model)
    out = []
    for i, t in enumerate(t_grid):
        x_t = float(ex.phi_inv(vt, t))
        ens = _tau_ensemble(model, t, span * x_t, x_t / 20.0, n_paths, seed, 90 + i)
        ok = ~ens.censored
        stat = abs(math.log(1.0 / t)) ** gamma * (ens.local_times[ok].max(axis=1) - t) / t
        out.append(LevelSummary.of(t, stat, int((~ok).sum()), scale=x_t))
    return out


def spread_scale(vt: ex.VariogramTable, t: float) -> float:
    """x with t·ψ(1/x) = 1: the typical size of |X_t|."""
    from scipy.optimize import brentq
    tab = vt.exponent
    g = lambda u: math.log(t * float(tab.psi(math.exp(-u))))
    return math.exp(brentq(g, -60.0, 60.0, xtol=1e-12))


def favorite_ratio(model: LevyModel, a: float, t_grid, n_paths: int, seed: int = 0,
                   vtable: ex.VariogramTable | None = None, span: float = 8.0,
                   bins_per_scale: int = 100) -> list[LevelSummary]:
    """|V_t| / φ⁻¹(L⁰_t / |log L⁰_t|^a) at fixed times t.

    Paths with |log L⁰_t| ≤ 1 (denominator undefined or degenerate) are
    excluded and counted.
    """
    vt = vtable or ex.build_variogram(model)
    out = []
    for i, t in enumerate(t_grid):
        s = spread_scale(vt, t)
        w = s / bins_per_scale
        half = int(math.ceil(span * s / w))
        spec = WalkSpec(w, half, _fixed_time_dt(vt, w), 2.0 * span * s, t_end=t)
        ens = run_ensemble(model, n_paths, spec, seed, 100 + i)
        ok = ~ens.censored
        L = ens.local_times[ok]
        vals, excluded = [], 0
        for row in L:
            j, _ = _favorite_from(row, spec.centers)
            l0 = row[spec.half_bins]
            lg = abs(math.log(l0)) if l0 > 0 else math.inf
            if not (1.0 < lg < math.inf):
                excluded += 1
                continue
            vals.append(abs(spec.centers[j]) / float(ex.phi_inv(vt, l0 / lg ** a)))
        out.append(LevelSummary.of(t, vals, int((~ok).sum()), excluded, scale=s))
    return out


def _fixed_time_dt(vt: ex.VariogramTable, width: float, frac: float = 0.2) -> float:
    """Step whose typical displacement is ``frac`` of a bin: ψ(1/(frac·w))·dt = 1."""
    return 1.0 / float(vt.exponent.psi(1.0 / (frac * width)))


# -- correlation decay along dyadic points ------------------------------------

@dataclass
class PolarityReport:
    k: np.ndarray
    weighted_sup: np.ndarray
    correlation: np.ndarray  # ρ(x_n, x_m) indexed by n, m
    decay_exponent: float  # fitted slope of log ρ_k against log 2^{-k}
    monotone: bool
    cauchy_schwarz_ok: bool
    n_unresolved: int


def polarity_ratio_check(model_or_vtable, n_max: int = 64, k_max: int = 64) -> PolarityReport:
    """√(ln k) · sup_{|n-m| ≥ k} u(x_m, x_n)/√(u(x_m,x_m) u(x_n,x_n)) on x_n = 2^{-n}.

    For a pure stable or pure Gaussian model σ₀² = K|x|^β and the covariance is evaluated in a
    cancellation-free form; otherwise entries whose covariance is below the
    quadrature noise are marked unresolved and skipped.
    """
    vt = model_or_vtable if isinstance(model_or_vtable, ex.VariogramTable) \
        else ex.build_variogram(model_or_vtable)
    x = 2.0 ** -np.arange(1, n_max + 1, dtype=float)
    X, Y = np.meshgrid(x, x, indexing="ij")
    big, small = np.maximum(X, Y), np.minimum(X, Y)
    pw = vt.power_law
    unresolved = np.zeros(X.shape, bool)
    if pw is not None:
        K, beta = pw
        # σ(b) - σ(b - s) = K b^β (1 - (1 - s/b)^β); log1p(-1) on the diagonal is harmless
        with np.errstate(divide="ignore"):
            diff = -K * big ** beta * np.expm1(beta * np.log1p(-small / big))
        u = 0.5 * (K * small ** beta + diff)
        var = K * x ** beta
    else:
        u = gs.covariance(vt, X, Y)
        var = vt.sigma0_sq_at(x)
        unresolved = np.abs(u) < 1e-6 * np.maximum.outer(var, var)
    rho = u / np.sqrt(np.outer(var, var))
    rho[unresolved] = np.nan
    gap = np.abs(np.subtract.outer(np.arange(n_max), np.arange(n_max)))
    k = np.arange(2, min(k_max, n_max - 1) + 1)
    sup = np.array([np.nanmax(np.where(gap >= kk, rho, np.nan)) for kk in k])
    ws = np.sqrt(np.log(k)) * sup
    rk = np.array([np.nanmax(np.where(gap == kk, rho, np.nan)) for kk in k])
    slope = float(np.polyfit(k * math.log(2.0), np.log(rk), 1)[0])
    cs = bool(np.all(np.abs(rho[~unresolved]) <= 1.0 + 1e-9))
    return PolarityReport(k, ws, rho, -slope, bool(np.all(np.diff(ws) < 0)), cs,
                          int(unresolved.sum()))
