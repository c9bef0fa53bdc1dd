"""Entry distributions and Wigner-class random matrix samplers.

Two routes are provided for the Gaussian ensembles:

* ``sample_dense`` draws the full Hermitian (beta=2) or real symmetric
  (beta=1) matrix ``M_n`` entry by entry.
* ``sample_tridiagonal_beta`` draws the tridiagonal beta-Hermite model whose
  eigenvalues have the same law as the dense GUE/GOE, in O(n) time and memory.

Both return unnormalized matrices; dividing by sqrt(n) is left to the
spectral statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import HermitianMatrix, TridiagonalMatrix

__all__ = [
    "EntryDistribution",
    "MatchReport",
    "EnsembleSpec",
    "SeedStream",
    "gaussian",
    "three_point",
    "rademacher",
    "gue_matched_three_point",
    "verify_moment_match",
    "gue_spec",
    "goe_spec",
    "three_point_spec",
    "rademacher_spec",
    "sample_dense",
    "sample_tridiagonal_beta",
]

MOMENT_TOL = 1e-12
_UINT64 = (1 << 64) - 1


def _double_factorial_odd(k: int) -> int:
    # (2k - 1)!! for k >= 0
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


@dataclass(frozen=True)
class EntryDistribution:
    """A symmetric scalar law with analytic moments.

    ``kind`` is one of ``"gaussian"`` (param ``variance``), ``"three_point"``
    (params ``atom``, ``atom_prob``: mass ``atom_prob`` at each of
    ``+-atom``, the rest at zero) or ``"rademacher"`` (param ``scale``).
    """

    kind: str
    variance: float = 0.0
    atom: float = 0.0
    atom_prob: float = 0.0
    scale: float = 1.0
    moments: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "gaussian":
            if not self.variance > 0:
                raise ValueError("gaussian variance must be positive")
        elif self.kind == "three_point":
            if not 0 < self.atom_prob <= 0.5:
                raise ValueError("atom_prob must lie in (0, 1/2]")
            if not self.atom > 0:
                raise ValueError("atom must be positive")
        elif self.kind == "rademacher":
            if not self.scale > 0:
                raise ValueError("rademacher scale must be positive")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "moments", tuple(self.moment(j) for j in range(1, 7)))

    def moment(self, j: int) -> float:
        """Analytic raw moment E[xi^j]."""
        if j < 0:
            raise ValueError("moment order must be nonnegative")
        if j == 0:
            return 1.0
        if j % 2 == 1:
            return 0.0
        k = j // 2
        if self.kind == "gaussian":
            return _double_factorial_odd(k) * self.variance**k
        if self.kind == "three_point":
            return 2.0 * self.atom_prob * self.atom**j
        return self.scale**j

    @property
    def var(self) -> float:
        return self.moment(2)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size) * math.sqrt(self.variance)
        if self.kind == "three_point":
            u = rng.random(size)
            p = self.atom_prob
            return np.where(u < p, -self.atom, np.where(u < 2.0 * p, self.atom, 0.0))
        signs = rng.integers(0, 2, size=size, dtype=np.int8)
        return np.where(signs == 1, self.scale, -self.scale)


def gaussian(variance: float) -> EntryDistribution:
    return EntryDistribution("gaussian", variance=float(variance))


def three_point(atom: float, atom_prob: float) -> EntryDistribution:
    return EntryDistribution("three_point", atom=float(atom), atom_prob=float(atom_prob))


def rademacher(scale: float = 1.0) -> EntryDistribution:
    return EntryDistribution("rademacher", scale=float(scale))


def gue_matched_three_point(target_variance: float) -> EntryDistribution:
    """Three-point law whose first four moments equal those of N(0, target_variance).

    Solving ``2 p a^2 = s^2`` and ``2 p a^4 = 3 s^4`` gives ``a = sqrt(3 s^2)``
    and ``p = 1/6``.
    """
    if not target_variance > 0:
        raise ValueError("target_variance must be positive")
    return three_point(math.sqrt(3.0 * target_variance), 1.0 / 6.0)


@dataclass
class MatchReport:
    order: int
    matched: bool
    moments: list  # (j, m_j of first, m_j of second, agrees)
    first_mismatch: int | None
    # E[Re^m Im^l] = E[Re^m] E[Im^l] for independent parts, m + l <= order
    mixed: dict

    def __str__(self):
        if self.matched:
            return f"moments match to order {self.order}"
        j, a, b, _ = self.moments[self.first_mismatch - 1]
        return f"mismatch at m{j}: {a:g} vs {b:g}"


def verify_moment_match(d1: EntryDistribution, d2: EntryDistribution, order: int) -> MatchReport:
    if order < 1:
        raise ValueError("order must be >= 1")
    rows = []
    first = None
    for j in range(1, order + 1):
        a, b = d1.moment(j), d2.moment(j)
        ok = abs(a - b) <= MOMENT_TOL
        rows.append((j, a, b, ok))
        if not ok and first is None:
            first = j
    mixed = {}
    for m in range(order + 1):
        for l in range(order + 1 - m):
            if m + l == 0:
                continue
            a = d1.moment(m) * d1.moment(l)
            b = d2.moment(m) * d2.moment(l)
            mixed[(m, l)] = (a, b, abs(a - b) <= MOMENT_TOL)
    return MatchReport(order=order, matched=first is None, moments=rows,
                       first_mismatch=first, mixed=mixed)


@dataclass(frozen=True)
class EnsembleSpec:
    """Wigner ensemble: ``off_diag`` is the law of each real/imaginary part
    (beta=2) or of each entry (beta=1); ``diag`` is the law of diagonal entries."""

    beta: int
    off_diag: EntryDistribution
    diag: EntryDistribution
    n: int

    def __post_init__(self):
        if self.beta not in (1, 2):
            raise ValueError("beta must be 1 or 2")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def gue_spec(n: int) -> EnsembleSpec:
    return EnsembleSpec(2, gaussian(0.5), gaussian(1.0), n)


def goe_spec(n: int) -> EnsembleSpec:
    return EnsembleSpec(1, gaussian(1.0), gaussian(2.0), n)


def three_point_spec(n: int) -> EnsembleSpec:
    """Complex Wigner ensemble matching GUE to fourth order."""
    return EnsembleSpec(2, gue_matched_three_point(0.5), gue_matched_three_point(1.0), n)


def rademacher_spec(n: int) -> EnsembleSpec:
    """Complex Wigner ensemble with +-1/sqrt(2) parts; matches GUE to second order only."""
    return EnsembleSpec(2, rademacher(math.sqrt(0.5)), rademacher(1.0), n)


@dataclass(frozen=True)
class SeedStream:
    """Per-replicate randomness, a pure function of the seed and replicate index.

    ``key`` separates independent families of replicates that share a master
    seed (for example the different ``n`` of a sweep).
    """

    master_seed: int
    replicate_index: int = 0
    key: tuple = ()

    def __post_init__(self):
        if self.replicate_index < 0:
            raise ValueError("replicate_index must be >= 0")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            self.master_seed & _UINT64,
            spawn_key=(*self.key, self.replicate_index),
        )
        return np.random.Generator(np.random.PCG64(ss))


def _rng(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


def sample_dense(spec: EnsembleSpec, stream) -> HermitianMatrix:
    """Draw the unnormalized Wigner matrix ``M_n``.

    The strictly upper triangle is drawn iid and mirrored, so the result
    equals its conjugate transpose bit for bit and the diagonal is real.
    """
    n = spec.n
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(stream)
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    if spec.beta == 2:
        upper = np.zeros((n, n), dtype=np.complex128)
        upper[iu] = spec.off_diag.sample(rng, m) + 1j * spec.off_diag.sample(rng, m)
    else:
        upper = np.zeros((n, n), dtype=np.float64)
        upper[iu] = spec.off_diag.sample(rng, m)
    a = upper + upper.conj().T
    a[np.diag_indices(n)] = spec.diag.sample(rng, n)
    return HermitianMatrix(a)


def sample_tridiagonal_beta(n: int, beta: int, stream) -> TridiagonalMatrix:
    """Tridiagonal beta-Hermite model for GUE (beta=2) or GOE (beta=1).

    beta=2: diagonal N(0, 1), subdiagonal chi_{2(n-i)} / sqrt(2).
    beta=1: diagonal N(0, 2), subdiagonal chi_{n-i}.
    """
    if beta not in (1, 2):
        raise ValueError("beta must be 1 or 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(stream)
    diag = rng.standard_normal(n)
    dof = np.arange(n - 1, 0, -1, dtype=np.float64)
    if beta == 2:
        # chi_{2k}/sqrt(2) = sqrt(Gamma(k, 1))
        sub = np.sqrt(rng.standard_gamma(dof))
    else:
        diag *= math.sqrt(2.0)
        # chi_k = sqrt(2 Gamma(k/2, 1))
        sub = np.sqrt(2.0 * rng.standard_gamma(0.5 * dof))
    return TridiagonalMatrix(diag, sub, check=False)
