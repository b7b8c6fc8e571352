"""Small Monte Carlo summaries: binomial intervals, median intervals, KS."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st

__all__ = ["wilson_interval", "median_ci", "ks_distance", "mean_se"]


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def median_ci(x, z: float = 1.96) -> tuple[float, float, float]:
    """Sample median with a distribution-free interval from binomial order statistics."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if n == 0:
        return math.nan, math.nan, math.nan
    med = float(np.median(x))
    half = z * math.sqrt(n) / 2
    lo = int(max(0, math.floor(n / 2 - half)))
    hi = int(min(n - 1, math.ceil(n / 2 + half)))
    return med, float(x[lo]), float(x[hi])


def ks_distance(a, b) -> tuple[float, float]:
    """Two-sample KS statistic and p-value."""
    r = _st.ks_2samp(np.asarray(a), np.asarray(b))
    return float(r.statistic), float(r.pvalue)


def mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
