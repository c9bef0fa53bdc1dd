"""Mergeable moment accumulators, Kolmogorov-Smirnov tests and OLS."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import CapacityError, InsufficientDataError

__all__ = [
    "StreamingMoments",
    "SampleSet",
    "moments_update",
    "moments_merge",
    "tree_merge",
    "moments_of",
    "normal_cdf",
    "kolmogorov_sf",
    "ks_one_sample",
    "ks_two_sample",
    "lattice_ks_normal",
    "regress_slope",
    "skewness",
]

KS_MIN_SAMPLES = 8
DEFAULT_CAPACITY = 1_000_000
# leaves of the fixed reduction tree hold this many consecutive replicates
LEAF_SIZE = 64


@dataclass(frozen=True)
class StreamingMoments:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    @property
    def variance(self) -> float:
        """Unbiased sample variance; nan when count < 2."""
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def std(self) -> float:
        return math.sqrt(self.variance) if self.count > 1 else math.nan

    @property
    def sem(self) -> float:
        """Standard error of the mean."""
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan

    @property
    def var_se(self) -> float:
        """Standard error of the sample variance under a normal approximation."""
        return self.variance * math.sqrt(2.0 / (self.count - 1)) if self.count > 1 else math.nan

    def update(self, x: float) -> "StreamingMoments":
        return moments_update(self, x)

    def merge(self, other: "StreamingMoments") -> "StreamingMoments":
        return moments_merge(self, other)

    def to_dict(self):
        return {"count": self.count, "mean": self.mean, "m2": self.m2,
                "min": self.min if self.count else None,
                "max": self.max if self.count else None}


def moments_update(acc: StreamingMoments, x: float) -> StreamingMoments:
    """Welford single-sample update."""
    x = float(x)
    n = acc.count + 1
    delta = x - acc.mean
    mean = acc.mean + delta / n
    m2 = acc.m2 + delta * (x - mean)
    return StreamingMoments(n, mean, m2, min(acc.min, x), max(acc.max, x))


def moments_merge(a: StreamingMoments, b: StreamingMoments) -> StreamingMoments:
    """Chan et al. pairwise combination."""
    if a.count == 0:
        return b
    if b.count == 0:
        return a
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    return StreamingMoments(n, mean, m2, min(a.min, b.min), max(a.max, b.max))


def tree_merge(parts) -> StreamingMoments:
    """Merge accumulators pairwise in a fixed balanced-tree order."""
    parts = list(parts)
    if not parts:
        return StreamingMoments()
    while len(parts) > 1:
        nxt = [moments_merge(parts[k], parts[k + 1]) for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _leaf(x: np.ndarray) -> StreamingMoments:
    if x.size == 0:
        return StreamingMoments()
    mean = float(x.mean())
    return StreamingMoments(int(x.size), mean, float(np.sum((x - mean) ** 2)),
                            float(x.min()), float(x.max()))


def moments_of(values) -> StreamingMoments:
    """Moments of values ordered by replicate index.

    The reduction shape depends only on the number of values, so the result
    is bit-identical however the values were produced.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    leaves = [_leaf(x[k:k + LEAF_SIZE]) for k in range(0, x.size, LEAF_SIZE)]
    return tree_merge(leaves)


class SampleSet:
    """Sorted sample buffer with a hard capacity."""

    def __init__(self, values=(), capacity: int = DEFAULT_CAPACITY):
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size > capacity:
            raise CapacityError(f"{values.size} samples exceed capacity {capacity}")
        self.capacity = capacity
        self.values = np.sort(values)

    def add(self, values) -> None:
        values = np.asarray(values, dtype=np.float64).ravel()
        if self.values.size + values.size > self.capacity:
            raise CapacityError(f"sample capacity {self.capacity} exceeded")
        self.values = np.sort(np.concatenate([self.values, values]))

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values)


def _as_sorted(samples) -> np.ndarray:
    if isinstance(samples, SampleSet):
        return samples.values
    return np.sort(np.asarray(samples, dtype=np.float64).ravel())


def normal_cdf(x):
    """Standard normal CDF via erfc, accurate in both tails."""
    out = 0.5 * erfc(-np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """Asymptotic P(sqrt(m) D > lam) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lam^2)."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # Jacobi theta form; the alternating series converges too slowly here
        s = sum(math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam * lam))
                for k in range(1, terms + 1))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * s))
    k = np.arange(1, terms + 1)
    s = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k * k * lam * lam))
    return float(min(1.0, max(0.0, s)))


def ks_one_sample(samples, cdf=normal_cdf, min_samples: int = KS_MIN_SAMPLES):
    """Kolmogorov-Smirnov distance to ``cdf`` and its asymptotic p-value."""
    x = _as_sorted(samples)
    m = x.size
    if m < max(min_samples, 1):
        raise InsufficientDataError(f"KS needs at least {min_samples} samples, got {m}")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, m + 1)
    d = float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))
    return d, kolmogorov_sf(math.sqrt(m) * d)


def ks_two_sample(a, b, min_samples: int = KS_MIN_SAMPLES):
    """Two-sample KS distance and asymptotic p-value with size ab/(a+b)."""
    xa, xb = _as_sorted(a), _as_sorted(b)
    if xa.size < min_samples or xb.size < min_samples:
        raise InsufficientDataError(f"KS needs at least {min_samples} samples per set")
    grid = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, grid, side="right") / xa.size
    fb = np.searchsorted(xb, grid, side="right") / xb.size
    d = float(np.max(np.abs(fa - fb)))
    m_eff = xa.size * xb.size / (xa.size + xb.size)
    return d, kolmogorov_sf(math.sqrt(m_eff) * d)


def lattice_ks_normal(values, mean: float, std: float):
    """KS distance between an integer-valued sample and N(mean, std^2) with a
    continuity correction: the empirical CDF at each integer k is compared to
    Phi((k + 1/2 - mean) / std).
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 1:
        raise InsufficientDataError("empty sample")
    if np.any(x != np.round(x)):
        raise ValueError("lattice KS needs integer-valued samples")
    ks = np.arange(x.min() - 1, x.max() + 1)
    emp = np.searchsorted(np.sort(x), ks, side="right") / x.size
    ref = normal_cdf((ks + 0.5 - mean) / std)
    d = float(np.max(np.abs(emp - ref)))
    return d, kolmogorov_sf(math.sqrt(x.size) * d)


def regress_slope(points):
    """Ordinary least squares ``y = slope x + intercept``; returns (slope, intercept, r2)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("regression needs at least two distinct x values")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    sxy = np.sum((x - xm) * (y - ym))
    slope = sxy / sxx
    intercept = ym - slope * xm
    ss_tot = np.sum((y - ym) ** 2)
    ss_res = np.sum((y - (slope * x + intercept)) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def skewness(values) -> float:
    """Sample skewness m3 / m2^{3/2} (biased moment estimator)."""
    x = np.asarray(values, dtype=np.float64).ravel()
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        return math.nan
    return float(np.mean(d**3) / m2**1.5)
