"""Semicircle law, its quantiles, and the asymptotic predictions for bulk
eigenvalue counts and eigenvalue locations.

All formulas use the natural logarithm.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "TheoryPrediction",
    "rho_sc_density",
    "semicircle_cdf",
    "quantile",
    "quantile_derivative",
    "predict",
    "clt_normalize",
    "fluctuation_params",
    "clt_index_map",
    "rigidity_window",
    "BULK_MARGIN",
]

# i/n must lie strictly inside (BULK_MARGIN, 1 - BULK_MARGIN)
BULK_MARGIN = 0.01
_Q_MIN = 1e-6
_DERIV_FLOOR = 1e-8


def rho_sc_density(x):
    """Semicircle density (1/2pi) sqrt(4 - x^2) on [-2, 2], zero outside."""
    x = np.asarray(x, dtype=np.float64)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * math.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(y):
    """F(y) = 1/2 + y sqrt(4 - y^2)/(4 pi) + arcsin(y/2)/pi, clamped to [0, 1]."""
    y = np.clip(np.asarray(y, dtype=np.float64), -2.0, 2.0)
    out = 0.5 + y * np.sqrt(4.0 - y * y) / (4.0 * math.pi) + np.arcsin(0.5 * y) / math.pi
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def quantile(q):
    """Classical location t(q): the point with F(t(q)) = q.

    Safeguarded Newton on [-2, 2]: a Newton step is taken only when it stays
    inside the current bracket and the density is above a small floor,
    otherwise the bracket is bisected.
    """
    q = np.asarray(q, dtype=np.float64)
    if np.any((q < 0) | (q > 1)) or np.any(np.isnan(q)):
        raise ValueError("quantile probability must lie in [0, 1]")
    scalar = q.ndim == 0
    q = np.atleast_1d(q)
    lo = np.full(q.shape, -2.0)
    hi = np.full(q.shape, 2.0)
    # odd-symmetric starting guess, exact at q = 0, 1/2, 1
    t = 2.0 * np.sin(math.pi * (q - 0.5))
    for _ in range(100):
        f = semicircle_cdf(t) - q
        lo = np.where(f <= 0, t, lo)
        hi = np.where(f >= 0, t, hi)
        dens = rho_sc_density(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = t - f / dens
        ok = (dens > _DERIV_FLOOR) & (step > lo) & (step < hi)
        t_new = np.where(ok, step, 0.5 * (lo + hi))
        t_new = np.where(f == 0, t, t_new)
        if np.all(np.abs(t_new - t) <= 1e-15 * np.maximum(1.0, np.abs(t))):
            t = t_new
            break
        t = t_new
    t = np.where(q == 0, -2.0, np.where(q == 1, 2.0, t))
    return float(t[0]) if scalar else t


def quantile_derivative(q):
    """t'(q) = 1 / rho_sc(t(q)); only defined for q in [1e-6, 1 - 1e-6]."""
    qa = np.asarray(q, dtype=np.float64)
    if np.any((qa < _Q_MIN) | (qa > 1 - _Q_MIN)):
        raise ValueError("quantile_derivative is out of domain near the edges")
    out = 1.0 / rho_sc_density(quantile(qa))
    return out


@dataclass(frozen=True)
class TheoryPrediction:
    n: int
    y: float
    beta: int
    mean: float
    variance: float
    sigma_numerics: float
    center: float  # classical location t(F(y)) = y
    fluctuation_std: float  # std of the eigenvalue whose classical location is y

    def to_dict(self):
        return asdict(self)


def _variance_coefficient(beta: int) -> float:
    if beta == 2:
        return 1.0 / (2.0 * math.pi**2)
    if beta == 1:
        return 2.0 / (2.0 * math.pi**2)
    raise ValueError("beta must be 1 or 2")


def predict(n: int, y: float, beta: int = 2) -> TheoryPrediction:
    """Leading-order mean and variance of N_[y, inf)(W_n)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not -2.0 < y < 2.0:
        raise ValueError("y must lie strictly inside (-2, 2)")
    coef = _variance_coefficient(beta)
    ln = math.log(n)
    var = coef * ln
    mean = n * (1.0 - semicircle_cdf(y))
    fl_std = math.sqrt(2.0 * ln / ((4.0 - y * y) * n * n))
    if beta == 1:
        fl_std *= math.sqrt(2.0)
    return TheoryPrediction(n=n, y=float(y), beta=beta, mean=mean, variance=var,
                            sigma_numerics=math.sqrt(var), center=float(y),
                            fluctuation_std=fl_std)


def clt_normalize(count, p: TheoryPrediction):
    """(count - mean) / sqrt(variance): the count standardized by theory."""
    if not p.variance > 0:
        raise ValueError("prediction variance must be positive")
    if np.ndim(count):
        return (np.asarray(count, dtype=np.float64) - p.mean) / p.sigma_numerics
    return (float(count) - p.mean) / p.sigma_numerics


def _check_bulk_index(i, n):
    i = np.asarray(i)
    if np.any(i < 1) or np.any(i > n):
        raise ValueError("index outside 1..n")
    r = i / n
    if np.any(r <= BULK_MARGIN) or np.any(r >= 1 - BULK_MARGIN):
        raise ValueError("index outside the bulk window (0.01, 0.99)")


def fluctuation_params(i, n: int):
    """Center t(i/n) and Gaussian std sqrt(2 ln n / ((4 - t^2) n^2)) of the
    i-th normalized GUE eigenvalue."""
    _check_bulk_index(i, n)
    center = quantile(np.asarray(i, dtype=np.float64) / n)
    std = np.sqrt(2.0 * math.log(n) / ((4.0 - center * center) * n * n))
    if np.ndim(center) == 0:
        return float(center), float(std)
    return center, std


def clt_index_map(y: float, x: float, n: int):
    """Index i_n and threshold x_n turning P(standardized count <= x) into a
    statement about the single eigenvalue lambda_{i_n}."""
    if not -2.0 < y < 2.0:
        raise ValueError("y must lie strictly inside (-2, 2)")
    if n < 3:
        raise ValueError("n must be >= 3")
    ln = math.log(n)
    i_n = n * semicircle_cdf(y) - x * math.sqrt(ln / (2.0 * math.pi**2))
    q = i_n / n
    if not 0.0 < q < 1.0:
        raise ValueError("i_n/n fell outside (0, 1)")
    t = quantile(q)
    x_n = math.sqrt((4.0 - t * t) / 2.0) * (y - t) / (math.sqrt(ln) / n)
    return i_n, x_n


def rigidity_window(i, n: int, C: float = 1.0):
    """(ln n)^{C ln ln n} min(i, n - i + 1)^{-1/3} n^{-2/3}."""
    if not C > 0:
        raise ValueError("C must be positive")
    ia = np.asarray(i)
    if np.any(ia < 1) or np.any(ia > n):
        raise ValueError("index outside 1..n")
    ln = math.log(n)
    polylog = ln ** (C * math.log(ln)) if ln > 0 else 1.0
    m = np.minimum(ia, n - ia + 1).astype(np.float64)
    out = polylog * m ** (-1.0 / 3.0) * n ** (-2.0 / 3.0)
    return float(out) if np.ndim(out) == 0 else out
