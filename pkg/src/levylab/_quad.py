"""Quadrature primitives shared by the exponent and gaussian modules."""
from __future__ import annotations

import math

import numpy as np

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_U_ASYM = 40.0  # beyond this the cosine-tail expansion is accurate to rounding


def gl_panels(f, edges: np.ndarray) -> np.ndarray:
    """∫ f over consecutive panels [edges[i], edges[i+1]] with 16-point Gauss-Legendre.

    ``edges`` may be 2-D (batch, n_edges); f is called once on the full node array.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[..., :-1], edges[..., 1:]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * GL_NODES
    return np.sum(f(nodes) * GL_WEIGHTS, axis=-1) * half


def cos_power_tail(U, p: float) -> np.ndarray:
    """C(U) = ∫_U^∞ cos(u) u^{-p} du for U >= 1, p > 0 (vectorized over U)."""
    U = np.atleast_1d(np.asarray(U, dtype=float))
    out = np.empty_like(U)
    big = U >= _U_ASYM
    if np.any(big):
        out[big] = _cos_tail_asym(U[big], p)
    small = ~big
    if np.any(small):
        Us = U[small]
        # panels of width <= 1 up to the expansion threshold
        n = int(math.ceil(_U_ASYM - Us.min())) + 1
        t = np.linspace(0.0, 1.0, n + 1)
        edges = Us[:, None] + (_U_ASYM - Us[:, None]) * t[None, :]
        body = gl_panels(lambda u: np.cos(u) * u ** (-p), edges).sum(axis=1)
        out[small] = body + _cos_tail_asym(np.array([_U_ASYM]), p)[0]
    return out


def _cos_tail_asym(U: np.ndarray, p: float) -> np.ndarray:
    # ∫_U^∞ e^{iu} u^{-p} du = i e^{iU} U^{-p} Σ_n (-i)^n (p)_n U^{-n}, truncated at the smallest term
    acc = np.zeros(U.shape, dtype=complex)
    term = np.ones(U.shape, dtype=complex)
    prev = np.full(U.shape, np.inf)
    live = np.ones(U.shape, dtype=bool)
    for n in range(200):
        mag = np.abs(term)
        live &= mag < prev
        acc = acc + np.where(live, term, 0)
        live &= mag > 1e-18 * np.abs(acc)
        if not live.any():
            break
        prev = mag
        term = term * (-1j) * (p + n) / U
    return np.real(1j * np.exp(1j * U) * U ** (-p) * acc)


def one_minus_cos_power(a, b, p: float) -> np.ndarray:
    """∫_a^b (1 - cos u) u^{-p} du, vectorized over 0 <= a < b <= ∞."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.broadcast_to(np.asarray(b, dtype=float), a.shape).copy()
    out = np.zeros(a.shape)
    # series on (a, min(b,1)]
    lo, hi = a, np.minimum(b, 1.0)
    m = hi > lo
    if np.any(m):
        out[m] += _series_part(lo[m], hi[m], p)
    # closed form minus cosine tails on (max(a,1), b]
    lo2 = np.maximum(a, 1.0)
    m = b > lo2
    if np.any(m):
        out[m] += _outer_part(lo2[m], b[m], p)
    return out


def _series_part(a, b, p):
    # 1 - cos u = Σ_{k>=1} (-1)^{k+1} u^{2k}/(2k)!, valid and fast for u <= 1
    tot = np.zeros(a.shape)
    for k in range(1, 14):
        e = 2 * k + 1 - p
        if abs(e) < 1e-14:
            seg = np.log(b / a)
        else:
            with np.errstate(divide="ignore"):
                seg = (b**e - np.where(a > 0, a**e, 0.0)) / e
        tot += (-1) ** (k + 1) / math.factorial(2 * k) * seg
    return tot


def _outer_part(a, b, p):
    inf = np.isinf(b)
    q = 1.0 - p
    if abs(q) < 1e-14:
        pow_int = np.log(b / a)
    else:
        pow_int = (np.where(inf, 0.0, b**q) - a**q) / q
    if p > 0:
        cos_int = cos_power_tail(a, p) - np.where(inf, 0.0, _safe_tail(b, p))
    else:
        # growth or flat density on a bounded band: integrate directly
        cos_int = np.array([_cos_direct(x, y, p) for x, y in zip(a, b)])
    return pow_int - cos_int


def _safe_tail(b, p):
    out = np.zeros(b.shape)
    fin = np.isfinite(b)
    if np.any(fin):
        out[fin] = cos_power_tail(b[fin], p)
    return out


def _cos_direct(a, b, p):
    n = int(min(1e6, math.ceil((b - a) / 1.0))) + 1
    return float(gl_panels(lambda u: np.cos(u) * u ** (-p), np.linspace(a, b, n + 1)).sum())


def wynn_epsilon(partial_sums: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Wynn's epsilon extrapolation along the last axis.

    Returns the accelerated limit and an error estimate (change between the
    last two even-column estimates), vectorized over leading axes.
    """
    s = np.asarray(partial_sums, dtype=float)
    e_prev = np.zeros(s.shape[:-1] + (s.shape[-1] + 1,))  # column -1
    e_cur = s.copy()  # column 0
    best = s[..., -1].copy()
    err = np.abs(s[..., -1] - s[..., -2])
    last_even = best.copy()
    k = 0
    while e_cur.shape[-1] >= 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.diff(e_cur, axis=-1)
            nxt = e_prev[..., 1:d.shape[-1] + 1] + 1.0 / d
        e_prev, e_cur = e_cur, nxt
        k += 1
        if k % 2 == 0:
            cand = e_cur[..., -1]
            ok = np.isfinite(cand)
            new_err = np.where(ok, np.abs(cand - last_even), np.inf)
            better = ok & (new_err < err)
            best = np.where(better, cand, best)
            err = np.where(better, new_err, err)
            last_even = np.where(ok, cand, last_even)
    return best, err


__all__ = ["gl_panels", "cos_power_tail", "one_minus_cos_power", "wynn_epsilon"]
