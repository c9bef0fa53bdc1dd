"""Tridiagonal reduction, Sturm/LDL^T inertia counts and eigenvalues.

The O(n) kernels (``negcount`` and the bisection in ``kth_eigenvalue``) are
compiled with numba. Dense reduction and the full-spectrum solver delegate to
LAPACK (``?sytrd``/``?hetrd`` and ``?sterf``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import NumericalFailure

__all__ = [
    "TridiagonalMatrix",
    "HermitianMatrix",
    "Spectrum",
    "householder_tridiagonalize",
    "negcount",
    "counting_function",
    "kth_eigenvalue",
    "all_eigenvalues",
    "default_tol",
]

EPS = 2.0**-52


class TridiagonalMatrix:
    """Real symmetric tridiagonal matrix with diagonal ``diag`` (length n)
    and nonnegative subdiagonal ``subdiag`` (length n - 1)."""

    __slots__ = ("diag", "subdiag")

    def __init__(self, diag, subdiag, check: bool = True):
        diag = np.ascontiguousarray(diag, dtype=np.float64)
        subdiag = np.ascontiguousarray(subdiag, dtype=np.float64)
        if check:
            if diag.ndim != 1 or diag.size < 1:
                raise ValueError("diag must be a nonempty 1-d array")
            if subdiag.shape != (diag.size - 1,):
                raise ValueError("subdiag must have length n - 1")
            if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(subdiag))):
                raise ValueError("entries must be finite")
            if np.any(subdiag < 0):
                raise ValueError("subdiag must be nonnegative (canonical form)")
        self.diag = diag
        self.subdiag = subdiag

    @property
    def n(self) -> int:
        return self.diag.size

    def scaled(self, factor: float) -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.diag * factor, self.subdiag * factor, check=False)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.subdiag, 1) + np.diag(self.subdiag, -1)

    def gershgorin(self) -> tuple[float, float]:
        return _gershgorin(self.diag, self.subdiag)

    def __repr__(self):
        return f"TridiagonalMatrix(n={self.n})"


class HermitianMatrix:
    """Dense Hermitian (complex) or real symmetric matrix."""

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 1:
            raise ValueError("expected a nonempty square matrix")
        if not np.iscomplexobj(data):
            data = data.astype(np.float64, copy=False)
        else:
            data = data.astype(np.complex128, copy=False)
        self.data = data

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def beta(self) -> int:
        return 2 if np.iscomplexobj(self.data) else 1

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.data, self.data.conj().T))


@dataclass
class Spectrum:
    values: np.ndarray
    normalized: bool = False

    def __len__(self):
        return self.values.size


def default_tol(n: int, normalized: bool = False) -> float:
    return 1e-10 if normalized else 1e-10 * math.sqrt(n)


@numba.njit(cache=True)
def _gershgorin(diag, sub):
    n = diag.shape[0]
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(sub[i - 1])
        if i < n - 1:
            r += abs(sub[i])
        lo = min(lo, diag[i] - r)
        hi = max(hi, diag[i] + r)
    return lo, hi


@numba.njit(cache=True)
def _norm_inf(diag, sub):
    n = diag.shape[0]
    out = 0.0
    for i in range(n):
        r = abs(diag[i])
        if i > 0:
            r += abs(sub[i - 1])
        if i < n - 1:
            r += abs(sub[i])
        out = max(out, r)
    return out


@numba.njit(cache=True)
def _pivmin(diag, sub):
    return EPS * max(_norm_inf(diag, sub), 1e-300)


@numba.njit(cache=True)
def _negcount(diag, sub, y, pivmin):
    # Signs of the LDL^T pivots of T - yI. Tiny pivots are set to +pivmin,
    # i.e. the shift moves just below y, so eigenvalues equal to y are not counted.
    n = diag.shape[0]
    d = diag[0] - y
    if abs(d) < pivmin:
        d = pivmin
    count = 1 if d < 0.0 else 0
    for i in range(1, n):
        b = sub[i - 1]
        d = (diag[i] - y) - b * b / d
        if abs(d) < pivmin:
            d = pivmin
        if d < 0.0:
            count += 1
    return count


@numba.njit(cache=True)
def _bisect(diag, sub, i, tol, pivmin):
    lo, hi = _gershgorin(diag, sub)
    width = hi - lo
    # widen slightly so the bracket is strict even for a zero-width spectrum
    pad = max(width, abs(lo), abs(hi), 1.0) * 4.0 * EPS + pivmin
    lo -= pad
    hi += pad
    iters = 1 + int(math.ceil(math.log2(max((hi - lo) / tol, 1.0))))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _negcount(diag, sub, mid, pivmin) >= i:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@numba.njit(cache=True)
def _bisect_all(diag, sub, tol, pivmin):
    n = diag.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _bisect(diag, sub, i + 1, tol, pivmin)
    return out


def negcount(T: TridiagonalMatrix, y: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``y``."""
    return int(_negcount(T.diag, T.subdiag, float(y), _pivmin(T.diag, T.subdiag)))


def counting_function(T: TridiagonalMatrix, y: float, normalized: bool = False) -> int:
    """``N_[y, inf)``: eigenvalues of ``T`` (or of ``T / sqrt(n)``) at or above ``y``."""
    shift = y * math.sqrt(T.n) if normalized else y
    return T.n - negcount(T, shift)


def kth_eigenvalue(T: TridiagonalMatrix, i: int, tol: float | None = None) -> float:
    """The i-th smallest eigenvalue (1-based) by bisection on ``negcount``."""
    if not 1 <= i <= T.n:
        raise ValueError(f"index {i} outside 1..{T.n}")
    if tol is None:
        tol = default_tol(T.n)
    if not tol > 0:
        raise ValueError("tol must be positive")
    return float(_bisect(T.diag, T.subdiag, int(i), float(tol), _pivmin(T.diag, T.subdiag)))


def all_eigenvalues(T: TridiagonalMatrix, tol: float | None = None, method: str = "auto") -> Spectrum:
    """All eigenvalues in ascending order, each within ``tol``.

    ``method`` is ``"qr"`` (LAPACK root-free QR, ``?sterf``), ``"bisection"``
    or ``"auto"``, which uses QR unless ``tol`` is below what QR can certify.
    """
    n = T.n
    if tol is None:
        tol = default_tol(n)
    if not tol > 0:
        raise ValueError("tol must be positive")
    norm = _norm_inf(T.diag, T.subdiag)
    if method == "auto":
        method = "qr" if tol >= 8.0 * n * EPS * max(norm, 1e-300) else "bisection"
    if method == "qr":
        if n == 1:
            values = T.diag.copy()
        else:
            try:
                values = scipy.linalg.eigvalsh_tridiagonal(
                    T.diag, T.subdiag, lapack_driver="sterf", check_finite=False
                )
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure(f"tridiagonal QR did not converge: {exc}") from exc
            values = np.sort(values)
    elif method == "bisection":
        values = _bisect_all(T.diag, T.subdiag, float(tol), _pivmin(T.diag, T.subdiag))
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(values)):
        raise NumericalFailure("non-finite eigenvalues")
    return Spectrum(values, normalized=False)


def householder_tridiagonalize(H: HermitianMatrix) -> TridiagonalMatrix:
    """Unitarily similar tridiagonal form with nonnegative subdiagonal.

    The reduction itself is LAPACK's blocked Householder (``?sytrd`` /
    ``?hetrd``); the off-diagonal signs are then removed by a diagonal
    unitary similarity.
    """
    n = H.n
    a = H.data
    if n == 1:
        return TridiagonalMatrix(np.real(a[0]).astype(np.float64), np.empty(0))
    if H.beta == 2:
        fn, lwork_fn = lapack.zhetrd, lapack.zhetrd_lwork
    else:
        fn, lwork_fn = lapack.dsytrd, lapack.dsytrd_lwork
    lwork, info = lwork_fn(n)
    lwork = max(int(np.real(lwork)), 1)
    _, d, e, _, info = fn(np.asfortranarray(a), lower=1, lwork=lwork)
    if info != 0:
        raise NumericalFailure(f"tridiagonal reduction failed (info={info})")
    return TridiagonalMatrix(np.asarray(d, dtype=np.float64), np.abs(np.asarray(e, dtype=np.float64)))
