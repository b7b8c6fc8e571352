"""The associated Gaussian process η with variogram σ₀².

η has covariance u(x, y) = ½(σ₀²(x) + σ₀²(y) - σ₀²(x-y)), so η(0) = 0 and the
covariance matrix on any grid containing 0 is singular.  A pivoted Cholesky
factor F (Γ ≈ F Fᵀ, rank r) both samples the field and realizes the
Cameron-Martin pairing exactly in the r-dimensional coordinate space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy import fft as sp_fft
from scipy.linalg import lapack

from . import exponent as ex
from ._quad import gl_panels
from .measure import LevyModel
from .stats import wilson_interval

__all__ = [
    "GaussianField",
    "IncrementField",
    "lower_tail_nested",
    "lower_tail_refined",
    "MaxLocationSample",
    "RkhsShift",
    "TailEstimate",
    "covariance",
    "make_field",
    "uniform_sites",
    "geometric_sites",
    "sample",
    "sample_chunks",
    "leftmost_max",
    "leftmost_argmax",
    "upper_tail_probe",
    "lower_tail_probe",
    "fit_decay_exponent",
    "bump",
    "bump_hat",
    "rkhs_norm",
    "cameron_martin_check",
]

CHUNK = 2048  # paths per RNG stream; fixed so results do not depend on batching


class CovarianceError(np.linalg.LinAlgError):
    pass


def covariance(vtable: ex.VariogramTable, x, y):
    """u(x, y) = ½(σ₀²(x) + σ₀²(y) - σ₀²(x-y))."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    s = vtable.sigma0_sq_at(np.stack([x, y, x - y]))
    return 0.5 * (s[0] + s[1] - s[2])


def uniform_sites(half_width: float, spacing: float) -> np.ndarray:
    n = int(round(half_width / spacing))
    return np.arange(-n, n + 1) * (half_width / n)


def geometric_sites(half_width: float, x_min: float, per_octave: int = 16,
                    uniform_spacing: float | None = None) -> np.ndarray:
    """Symmetric grid dense near 0: geometric from x_min, merged with a uniform grid."""
    n = int(math.ceil(per_octave * math.log2(half_width / x_min)))
    pos = half_width * 2.0 ** (-np.arange(n + 1) / per_octave)
    if uniform_spacing:
        pos = np.concatenate([pos, uniform_sites(half_width, uniform_spacing)])
        pos = pos[pos > 0]
    pos = np.unique(np.round(pos, 15))
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass
class GaussianField:
    vtable: ex.VariogramTable
    sites: np.ndarray
    seed: int = 0
    cov: np.ndarray = field(init=False, repr=False)
    factor: np.ndarray = field(init=False, repr=False)
    rank: int = field(init=False)

    def __post_init__(self):
        s = np.asarray(self.sites, dtype=float)
        if not np.any(s == 0):
            raise ValueError("site grid must contain 0")
        if not np.allclose(np.sort(s), -np.sort(s)[::-1], atol=1e-12):
            raise ValueError("site grid must be symmetric about 0")
        self.sites = np.sort(s)
        X, Y = np.meshgrid(self.sites, self.sites, indexing="ij")
        self.cov = covariance(self.vtable, X, Y)
        self.factor, self.rank = _pivoted_factor(self.cov)

    @property
    def model(self) -> LevyModel:
        return self.vtable.model

    @property
    def zero_index(self) -> int:
        return int(np.flatnonzero(self.sites == 0)[0])

    def window(self, a: float, b: float) -> np.ndarray:
        return np.flatnonzero((self.sites >= a - 1e-12) & (self.sites <= b + 1e-12))


def _pivoted_factor(cov: np.ndarray, rel_tol: float = 1e-10):
    n = cov.shape[0]
    tol = rel_tol * float(np.max(np.diag(cov)))
    c, piv, rank, info = lapack.dpstrf(cov, lower=1, tol=tol)
    if info < 0:
        raise CovarianceError("covariance not PSD at tolerance")
    L = np.tril(c)[:, :rank]
    F = np.zeros((n, rank))
    F[piv - 1, :] = L
    resid = np.max(np.abs(F @ F.T - cov))
    if resid > 1e-6 * max(1.0, float(np.max(np.diag(cov)))):
        raise CovarianceError(f"covariance not PSD at tolerance (residual {resid:.3g})")
    return F, int(rank)


def make_field(model_or_vtable, sites, seed: int = 0) -> GaussianField:
    if isinstance(model_or_vtable, ex.VariogramTable):
        vt = model_or_vtable
    else:
        vt = ex.build_variogram(model_or_vtable)
    return GaussianField(vt, np.asarray(sites, dtype=float), seed)


def _stream(seed: int, tag: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, k)))


def sample_chunks(fld: GaussianField, n_paths: int, seed: int | None = None,
                  tag: int = 0, with_coords: bool = False) -> Iterator:
    """Yield path blocks of at most CHUNK rows; block k always uses stream (seed, tag, k)."""
    seed = fld.seed if seed is None else seed
    for k, start in enumerate(range(0, n_paths, CHUNK)):
        m = min(CHUNK, n_paths - start)
        z = _stream(seed, tag, k).standard_normal((m, fld.rank))
        paths = z @ fld.factor.T
        paths[:, fld.zero_index] = 0.0
        yield (paths, z) if with_coords else paths


def sample(fld: GaussianField, n_paths: int, seed: int | None = None, tag: int = 0) -> np.ndarray:
    """n_paths × n_sites array of independent field samples."""
    if n_paths == 0:
        return np.empty((0, fld.sites.size))
    return np.concatenate(list(sample_chunks(fld, n_paths, seed, tag)))


@dataclass
class IncrementField:
    """η on the uniform grid {-δ + k·2δ/N}, sampled exactly by circulant embedding.

    The increments of η are stationary with autocovariance
    γ(k) = ½(σ₀²((k+1)s) + σ₀²((k-1)s) - 2σ₀²(ks)); embedding them in a circulant
    of size 2N and taking one complex FFT yields two independent paths.
    Intended for probes that need far finer grids than a dense factorization allows.
    """

    vtable: ex.VariogramTable
    delta: float
    n: int
    seed: int = 0
    single: bool = True  # complex64 FFT; ample for probability estimates

    def __post_init__(self):
        self.spacing = 2.0 * self.delta / self.n
        g = ex.increment_autocov(self.vtable, self.spacing, self.n + 1)
        circ = np.concatenate([g, g[-2:0:-1]])  # symmetric circulant of size 2n
        eig = np.fft.fft(circ).real
        if eig.min() < -1e-8 * eig.max():
            raise CovarianceError("circulant embedding is not nonnegative definite")
        ftype = np.float32 if self.single else np.float64
        self._sqrt = np.sqrt(np.maximum(eig, 0.0) / eig.size).astype(ftype)
        self.sites = -self.delta + self.spacing * np.arange(self.n + 1)
        self.zero_index = self.n // 2

    def sample_chunks(self, n_paths: int, seed: int | None = None, tag: int = 0,
                      block: int = 128) -> Iterator[np.ndarray]:
        seed = self.seed if seed is None else seed
        ftype = self._sqrt.dtype
        m = self._sqrt.size
        done = 0
        k = 0
        while done < n_paths:
            half = min(block, (n_paths - done + 1) // 2)
            rng = _stream(seed, tag, k)
            z = np.empty((half, m), dtype=np.complex64 if ftype == np.float32 else np.complex128)
            z.real = rng.standard_normal((half, m), dtype=ftype)
            z.imag = rng.standard_normal((half, m), dtype=ftype)
            w = sp_fft.fft(z * self._sqrt, axis=1, overwrite_x=True)[:, : self.n]
            inc = np.concatenate([w.real, w.imag])[: n_paths - done]
            paths = np.zeros((inc.shape[0], self.n + 1), dtype=ftype)
            np.cumsum(inc, axis=1, out=paths[:, 1:])
            paths -= paths[:, [self.zero_index]]
            yield paths
            done += inc.shape[0]
            k += 1


def lower_tail_nested(fld: IncrementField, h, n_paths: int, seed: int | None = None,
                      levels: int = 6):
    """Lower-tail counts on the grid and on its nested subgrids (every 2^j-th site).

    Returns counts[j, i] for subgrid spacing 2^j·s and h[i], from one shared sample.
    """
    hs = np.atleast_1d(np.asarray(h, dtype=float))
    shat = ex.sigma0_hat_sq(fld.vtable, fld.delta)
    lev = np.sqrt(hs * shat)
    counts = np.zeros((levels, hs.size), dtype=np.int64)
    for paths in fld.sample_chunks(n_paths, seed, tag=53):
        for j in range(levels):
            m = paths[:, fld.zero_index % (1 << j)::1 << j].max(axis=1)
            counts[j] += (m[:, None] < lev[None, :]).sum(axis=0)
    return counts


def _smooth_length(n: int) -> int:
    """Smallest m·2^k >= n with m in {1, 3, 5, 9, 15}: fast for any power-of-two factor r."""
    return min(m << max(0, math.ceil(math.log2(n / m))) for m in (1, 3, 5, 9, 15))


def lower_tail_refined(vtable: ex.VariogramTable, delta: float, h, n_paths: int,
                       seed: int = 0, n_coarse: int = 1 << 12, n_fine: int = 1 << 18,
                       block: int = 16):
    """P(max of η over the fine grid on [-δ, δ] < √(h·σ̂₀²(δ))) for each h.

    Refining a grid can only raise the maximum, so a path whose coarse-grid
    maximum already reaches the largest level fails at every h.  Only the
    survivors are refined, by exact Gaussian conditioning: with Z an
    independent fine path, η_f = Z + Σ_fc Σ_cc⁻¹ (η_c - Z_c).  The term
    Σ_fc v contains Σ_j σ₀²(x - c_j) v_j, a convolution done by FFT.

    Returns (list of TailEstimate, number of survivors).
    """
    from scipy.linalg import cho_factor, cho_solve

    if n_fine % n_coarse:
        raise ValueError("n_fine must be a multiple of n_coarse")
    hs = np.atleast_1d(np.asarray(h, dtype=float))
    lev = np.sqrt(hs * ex.sigma0_hat_sq(vtable, delta))
    top = float(lev.max())
    coarse = IncrementField(vtable, delta, n_coarse, seed, single=False)
    keep = [p[p.max(axis=1) < top] for p in coarse.sample_chunks(n_paths, seed, tag=57)]
    surv = np.concatenate(keep) if keep else np.empty((0, n_coarse + 1))
    counts = np.zeros(hs.size, dtype=np.int64)
    if surv.shape[0]:
        fine = IncrementField(vtable, delta, n_fine, seed, single=True)
        r = n_fine // n_coarse
        nz = np.flatnonzero(coarse.sites != 0)
        c = coarse.sites[nz]
        cov = covariance(vtable, c[:, None], c[None, :])
        cho = cho_factor(cov, lower=True)
        sig_c = vtable.sigma0_sq_at(c)
        sig_f = vtable.sigma0_sq_at(fine.sites)
        # outputs n_f..2n_f of a circular convolution of length L > 2n_f are
        # alias-free; L = r·Lc makes the spectrum of v (spread on every r-th
        # fine site) the length-Lc spectrum of v tiled r times
        Lc = _smooth_length(2 * n_coarse + 1)
        L = r * Lc
        nfreq = L // 2 + 1
        tile = np.arange(nfreq) % Lc
        kern = vtable.sigma0_sq_at(fine.spacing * np.arange(-n_fine, n_fine + 1))
        khat = sp_fft.rfft(kern, L)
        pos = nz * r
        start = 0
        for Z in fine.sample_chunks(surv.shape[0], seed, tag=59, block=max(1, block // 2)):
            eta_c = surv[start:start + Z.shape[0]]
            start += Z.shape[0]
            Z = Z.astype(np.float64)
            v = cho_solve(cho, (eta_c[:, nz] - Z[:, pos]).T).T
            vc = np.zeros((v.shape[0], Lc))
            vc[:, nz] = v
            vhat = sp_fft.fft(vc, axis=1)[:, tile]
            conv = sp_fft.irfft(vhat * khat, L, axis=1)[:, n_fine:2 * n_fine + 1]
            eta = Z + 0.5 * (sig_f[None, :] * v.sum(axis=1)[:, None]
                             + (v @ sig_c)[:, None] - conv)
            m = eta.max(axis=1)
            counts += (m[:, None] < lev[None, :]).sum(axis=0)
    ests = [TailEstimate(float(hk), c / n_paths, *wilson_interval(int(c), n_paths), int(c), n_paths)
            for hk, c in zip(hs, counts)]
    return ests, int(surv.shape[0])


# -- leftmost maximum ---------------------------------------------------------

@dataclass(frozen=True)
class MaxLocationSample:
    a: float
    b: float
    tau: float
    value: float


def leftmost_argmax(paths: np.ndarray, sites: np.ndarray, a: float, b: float):
    """Vectorized leftmost argmax over the sites in [a, b]; returns (tau, max)."""
    idx = np.flatnonzero((sites >= a - 1e-12) & (sites <= b + 1e-12))
    sub = np.atleast_2d(paths)[:, idx]
    j = np.argmax(sub, axis=1)  # first occurrence
    return sites[idx][j], sub[np.arange(sub.shape[0]), j]


def leftmost_max(path: np.ndarray, sites: np.ndarray, a: float, b: float) -> MaxLocationSample:
    tau, v = leftmost_argmax(np.asarray(path)[None, :], np.asarray(sites), a, b)
    return MaxLocationSample(a, b, float(tau[0]), float(v[0]))


# -- tail probes ---------------------------------------------------------------

@dataclass
class TailEstimate:
    param: float
    estimate: float
    ci_lo: float
    ci_hi: float
    count: int
    n: int
    bound: float = math.nan


def upper_tail_probe(fld: GaussianField, h: float, u, n_paths: int, seed: int | None = None):
    """P(sup_{|x|<=h} |η| > u) for each u, plus the sample mean of the sup."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    idx = fld.window(-h, h)
    counts = np.zeros(u.size, dtype=np.int64)
    tot = tot2 = 0.0
    for paths in sample_chunks(fld, n_paths, seed, tag=31):
        m = np.max(np.abs(paths[:, idx]), axis=1)
        counts += (m[:, None] > u[None, :]).sum(axis=0)
        tot += m.sum()
        tot2 += (m**2).sum()
    mean = tot / n_paths
    se = math.sqrt(max(tot2 / n_paths - mean**2, 0.0) / n_paths)
    ests = [TailEstimate(float(uk), c / n_paths, *wilson_interval(int(c), n_paths), int(c), n_paths)
            for uk, c in zip(u, counts)]
    return ests, mean, se


def lower_tail_probe(fld: GaussianField, h, delta, n_paths: int, seed: int | None = None):
    """P(η(x) < √(h·σ̂₀²(δ)) for all |x| <= δ) over grids of h and δ (one shared sample)."""
    hs = np.atleast_1d(np.asarray(h, dtype=float))
    ds = np.atleast_1d(np.asarray(delta, dtype=float))
    if np.any(hs >= 1) or np.any(hs <= 0):
        raise ValueError("lower tail probe needs 0 < h < 1")
    shat = ex.sigma0_hat_sq(fld.vtable, ds)
    counts = np.zeros((ds.size, hs.size), dtype=np.int64)
    wins = [fld.window(-d, d) for d in ds]
    for paths in sample_chunks(fld, n_paths, seed, tag=37):
        for i, w in enumerate(wins):
            m = np.max(paths[:, w], axis=1)
            lev = np.sqrt(hs * shat[i])
            counts[i] += (m[:, None] < lev[None, :]).sum(axis=0)
    out = [[TailEstimate(float(hk), c / n_paths, *wilson_interval(int(c), n_paths), int(c), n_paths)
            for hk, c in zip(hs, row)] for row in counts]
    return out


def fit_decay_exponent(h: np.ndarray, est: list[TailEstimate]) -> tuple[float, float]:
    """Weighted least-squares slope of log P against log h, with its standard error.

    Levels with zero counts are dropped (only an upper confidence bound exists there).
    """
    h = np.asarray(h, dtype=float)
    p = np.array([e.estimate for e in est])
    n = np.array([e.n for e in est])
    keep = p > 0
    if keep.sum() < 2:
        return math.nan, math.nan
    x, y = np.log(h[keep]), np.log(p[keep])
    # delta-method variance of log p̂
    var = (1 - p[keep]) / (n[keep] * p[keep])
    w = 1.0 / var
    xm = np.sum(w * x) / w.sum()
    ym = np.sum(w * y) / w.sum()
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    return float(slope), float(math.sqrt(1.0 / sxx))


# -- RKHS shifts -----------------------------------------------------------------

def bump(x):
    """exp(1 - 1/(1 - x²)) on (-1, 1), zero outside; smooth with bump(0) = 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    m = np.abs(x) < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
    return out


_BUMP_EDGES = np.linspace(0.0, 1.0, 65)


def bump_hat(lam):
    """Fourier transform ∫ bump(x) e^{-iλx} dx = 2∫₀¹ bump(x) cos(λx) dx."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    vals = gl_panels(lambda x: bump(x)[None] * np.cos(lam[:, None, None] * x[None]), _BUMP_EDGES[None, :])
    return 2.0 * vals.sum(axis=-1)


@dataclass(frozen=True)
class RkhsShift:
    """f_h(x) = √h·f(x/h^a) for a profile f supported in [-1, 1] with f(0) = 1."""

    h: float
    a: float
    profile: Callable = bump
    profile_hat: Callable = bump_hat
    amplitude: float = 1.0

    def value(self, x):
        if self.h == 0:
            return np.zeros(np.shape(x))
        return self.amplitude * math.sqrt(self.h) * self.profile(np.asarray(x) / self.h**self.a)

    def centered(self, x):
        """f̄_h(x) = f_h(0) - f_h(x), which vanishes at 0."""
        return self.value(0.0) - self.value(x)


def rkhs_norm(table_or_model, shift: RkhsShift, delta: float | None = None,
              n_panels: int = 400, lam_max: float = 4000.0) -> float:
    """‖f̄_h‖² for η (delta=None) or for the rescaled process η(δ·)/σ̂₀(δ).

    With κ = δ·h^a the norm is (1/π)·δσ̂₀²(δ)·h^{1+a}·∫₀^∞ ψ(λ/κ)|f̂(λ)|² dλ
    (δσ̂₀²(δ) is replaced by 1 and δ by 1 for η itself).
    """
    if shift.h == 0 or shift.amplitude == 0:
        return 0.0
    if isinstance(table_or_model, ex.VariogramTable):
        vt = table_or_model
        et = vt.exponent
    elif isinstance(table_or_model, ex.ExponentTable):
        vt, et = None, table_or_model
    else:
        et = ex.build_table(table_or_model, 1e-9, 1e9)
        vt = None
    if delta is None:
        pref, d = 1.0, 1.0
    else:
        if vt is None:
            vt = ex.build_variogram(et)
        pref, d = delta * ex.sigma0_hat_sq(vt, delta), delta
    kappa = d * shift.h**shift.a
    edges = np.concatenate([[0.0], np.geomspace(1e-6, lam_max, n_panels)])
    integ = gl_panels(lambda l: et.psi(l / kappa) * np.abs(shift.profile_hat(l.ravel()).reshape(l.shape)) ** 2,
                      edges).sum()
    return float(shift.amplitude**2 * pref * shift.h ** (1 + shift.a) * integ / math.pi)


@dataclass
class CameronMartinReport:
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    z_score: float
    norm_sq_discrete: float
    norm_sq_spectral: float
    moment: float
    moment_se: float
    moment_target: float
    weight_var: float
    stable: bool
    passed: bool


def cameron_martin_check(fld: GaussianField, shift_values: np.ndarray, level: float,
                         n_paths: int, seed: int | None = None,
                         norm_sq_spectral: float = math.nan) -> CameronMartinReport:
    """E[F(η+f)] against e^{-‖f‖²/2} E[F(η) e^{η(f)}] for F = 1{max η < level}.

    The pairing η(f) is vᵀz where f = F v is solved in the factor's coordinates,
    so ‖f‖² = |v|² is the exact norm of the discretized shift.
    """
    f = np.asarray(shift_values, dtype=float)
    v, *_ = np.linalg.lstsq(fld.factor, f, rcond=None)
    resid = np.max(np.abs(fld.factor @ v - f)) if f.any() else 0.0
    if resid > 1e-6 * max(1.0, np.max(np.abs(f))):
        raise ValueError("shift is not in the range of the discretized covariance")
    nsq = float(v @ v)
    wvar = math.expm1(nsq)
    # left side and the weighted right side use independent streams
    l_sum = l_sq = 0.0
    for paths in sample_chunks(fld, n_paths, seed, tag=41):
        ind = (np.max(paths + f, axis=1) < level).astype(float)
        l_sum += ind.sum()
        l_sq += (ind**2).sum()
    r_sum = r_sq = m_sum = m_sq = 0.0
    for paths, z in sample_chunks(fld, n_paths, seed, tag=43, with_coords=True):
        w = np.exp(z @ v - 0.5 * nsq)
        ind = (np.max(paths, axis=1) < level).astype(float)
        r_sum += (ind * w).sum()
        r_sq += ((ind * w) ** 2).sum()
        m_sum += w.sum()
        m_sq += (w**2).sum()
    n = n_paths
    lhs, rhs = l_sum / n, r_sum / n
    lse = math.sqrt(max(l_sq / n - lhs**2, 0) / n)
    rse = math.sqrt(max(r_sq / n - rhs**2, 0) / n)
    mom = m_sum / n * math.exp(0.5 * nsq)  # estimate of E e^{η(f)}
    mse = math.sqrt(max(m_sq / n - (m_sum / n) ** 2, 0) / n) * math.exp(0.5 * nsq)
    z = abs(lhs - rhs) / math.sqrt(lse**2 + rse**2) if (lse + rse) > 0 else 0.0
    stable = wvar <= 1e3
    ok = stable and z <= 3.0 and abs(mom - math.exp(0.5 * nsq)) <= 3 * mse + 1e-12
    return CameronMartinReport(lhs, lse, rhs, rse, z, nsq, norm_sq_spectral, mom, mse,
                               math.exp(0.5 * nsq), wvar, stable, ok)
