import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerclt.ensembles import SeedStream, gue_spec, goe_spec, sample_dense
from wignerclt.spectral import (
    HermitianMatrix,
    TridiagonalMatrix,
    all_eigenvalues,
    counting_function,
    default_tol,
    householder_tridiagonalize,
    kth_eigenvalue,
    negcount,
)

PAIR = TridiagonalMatrix([0.0, 0.0], [1.0])  # spectrum {-1, +1}


def random_tridiagonal(rng, n):
    return TridiagonalMatrix(rng.standard_normal(n), np.abs(rng.standard_normal(n - 1)))


def test_validation():
    with pytest.raises(ValueError):
        TridiagonalMatrix([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        TridiagonalMatrix([1.0, 2.0], [-1.0])
    with pytest.raises(ValueError):
        TridiagonalMatrix([np.nan, 2.0], [1.0])
    with pytest.raises(ValueError):
        HermitianMatrix(np.zeros((2, 3)))


def test_negcount_examples():
    assert negcount(PAIR, 0.0) == 1
    assert negcount(PAIR, -1.5) == 0
    assert negcount(PAIR, 1.5) == 2
    n = 9
    eye = TridiagonalMatrix(np.ones(n), np.zeros(n - 1))
    assert negcount(eye, 2.0) == n
    assert negcount(eye, 0.5) == 0
    rng = np.random.default_rng(0)
    T = random_tridiagonal(rng, 40)
    lo, hi = T.gershgorin()
    assert negcount(T, lo - 1e-9) == 0
    assert negcount(T, hi + 1e-9) == T.n


def test_negcount_zero_diagonal_chain():
    # all pivots start at exactly zero; spectrum is 2cos(k pi/(n+1))
    n = 7
    T = TridiagonalMatrix(np.zeros(n), np.ones(n - 1))
    ev = 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    for y in (-1.9, -0.3, 0.0, 0.3, 1.9):
        expect = int(np.sum(ev < y)) if y != 0.0 else int(np.sum(ev < -1e-12))
        assert negcount(T, y) == expect


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**32 - 1))
def test_negcount_monotone(n, seed):
    rng = np.random.default_rng(seed)
    T = TridiagonalMatrix(rng.standard_normal(n), np.abs(rng.standard_normal(n - 1)))
    lo, hi = T.gershgorin()
    ys = np.sort(rng.uniform(lo - 1, hi + 1, 50))
    counts = [negcount(T, y) for y in ys]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    assert negcount(T, lo - 1e-6) == 0 and negcount(T, hi + 1e-6) == n


def test_counting_function_examples():
    assert counting_function(PAIR, 0.0) == 1
    assert counting_function(PAIR, -5.0) == 2
    rng = np.random.default_rng(1)
    T = random_tridiagonal(rng, 50)
    y1, y2 = -0.7, 0.4
    ev = np.linalg.eigvalsh(T.to_dense())
    assert counting_function(T, y1) - counting_function(T, y2) == np.sum((ev >= y1) & (ev < y2))
    # normalized counts look at T / sqrt(n)
    y = 0.05
    assert counting_function(T, y, normalized=True) == np.sum(ev / math.sqrt(50) >= y)


def test_kth_eigenvalue_examples():
    tol = 1e-12
    assert kth_eigenvalue(PAIR, 1, tol) == pytest.approx(-1.0, abs=tol)
    assert kth_eigenvalue(PAIR, 2, tol) == pytest.approx(1.0, abs=tol)
    d = np.array([3.0, -1.0, 2.5, 0.0, 7.0])
    D = TridiagonalMatrix(d, np.zeros(4))
    for i, v in enumerate(np.sort(d), 1):
        assert kth_eigenvalue(D, i, tol) == pytest.approx(v, abs=tol)
    with pytest.raises(ValueError):
        kth_eigenvalue(PAIR, 0)
    with pytest.raises(ValueError):
        kth_eigenvalue(PAIR, 3)


def test_kth_eigenvalue_nondecreasing_and_accurate():
    rng = np.random.default_rng(2)
    T = random_tridiagonal(rng, 80)
    tol = 1e-10
    vals = [kth_eigenvalue(T, i, tol) for i in range(1, 81)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    ref = np.linalg.eigvalsh(T.to_dense())
    assert np.max(np.abs(np.array(vals) - ref)) <= tol + 1e-13


def test_all_eigenvalues_examples():
    s = all_eigenvalues(PAIR, 1e-12)
    assert np.allclose(s.values, [-1.0, 1.0], atol=1e-12)
    rng = np.random.default_rng(3)
    for method in ("qr", "bisection"):
        T = random_tridiagonal(rng, 120)
        tol = 1e-10
        ev = all_eigenvalues(T, tol, method=method).values
        assert np.all(np.diff(ev) >= 0)
        norm = np.max(np.abs(T.to_dense()).sum(axis=1))
        assert abs(ev.sum() - T.diag.sum()) <= T.n * tol + T.n * 2.2e-16 * norm
        for i, lam in enumerate(ev, 1):
            assert negcount(T, lam - 2 * tol) <= i - 1
            assert negcount(T, lam + 2 * tol) >= i


def test_all_eigenvalues_single():
    s = all_eigenvalues(TridiagonalMatrix([4.2], []))
    assert list(s.values) == [4.2]


def test_kth_and_all_agree():
    rng = np.random.default_rng(4)
    T = random_tridiagonal(rng, 60)
    tol = 1e-10
    ev = all_eigenvalues(T, tol).values
    for i in range(1, 61):
        assert abs(kth_eigenvalue(T, i, tol) - ev[i - 1]) <= 2 * tol


def test_duality_random_tridiagonals():
    rng = np.random.default_rng(5)
    n, tol = 50, 1e-10
    for _ in range(1000):
        T = random_tridiagonal(rng, n)
        y = rng.uniform(-3, 3)
        count = counting_function(T, y)
        i = int(rng.integers(1, n + 1))
        lam = kth_eigenvalue(T, i, tol)
        assert (count <= n - i) == (lam <= y + 2 * tol)


def test_default_tol():
    assert default_tol(100) == pytest.approx(1e-9)
    assert default_tol(100, normalized=True) == 1e-10


# -- Householder reduction -------------------------------------------------

def test_householder_fixed_point():
    rng = np.random.default_rng(6)
    d = rng.standard_normal(6)
    e = rng.standard_normal(5)
    A = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    T = householder_tridiagonalize(HermitianMatrix(A))
    assert np.allclose(T.diag, d, atol=1e-14)
    assert np.allclose(T.subdiag, np.abs(e), atol=1e-14)


def test_householder_diagonal_unchanged():
    d = np.array([1.0, -2.0, 3.5, 0.25])
    T = householder_tridiagonalize(HermitianMatrix(np.diag(d)))
    assert np.allclose(T.diag, d, atol=0) and np.all(T.subdiag == 0)


def test_householder_ones():
    # spectrum of the rank-one all-ones 3x3 matrix: roots of l^2 (l - 3)
    T = householder_tridiagonalize(HermitianMatrix(np.ones((3, 3))))
    ev = all_eigenvalues(T, 1e-13, method="bisection").values
    assert np.allclose(ev, [0.0, 0.0, 3.0], atol=1e-12)


def test_householder_single():
    T = householder_tridiagonalize(HermitianMatrix(np.array([[2.5]])))
    assert T.n == 1 and T.diag[0] == 2.5


@pytest.mark.parametrize("spec", [gue_spec, goe_spec])
def test_householder_preserves_spectrum(spec):
    H = sample_dense(spec(40), SeedStream(3, 0))
    T = householder_tridiagonalize(H)
    assert np.all(T.subdiag >= 0)
    ref = np.sort(np.linalg.eigvals(H.data).real)
    ours = all_eigenvalues(T, 1e-12).values
    assert np.max(np.abs(ours - ref)) <= 1e-10 * np.abs(ref).max()


def _eigvals_oracle(H):
    # general (non-Hermitian) solver: Hessenberg QR, independent of ?hetrd
    return np.sort(np.linalg.eigvals(H).real)


def test_householder_counts_match_dense_oracle():
    rng = np.random.default_rng(12)
    for case in range(100):
        spec = gue_spec(30) if case % 2 == 0 else goe_spec(30)
        H = sample_dense(spec, SeedStream(77, case))
        T = householder_tridiagonalize(H)
        ev = _eigvals_oracle(H.data)
        for y in rng.uniform(ev[0] - 1, ev[-1] + 1, 20):
            if np.min(np.abs(ev - y)) < 1e-8:
                continue
            assert negcount(T, y) == int(np.sum(ev < y))


def _random_integer_hermitian(rng, n):
    a = rng.integers(-3, 4, (n, n)) + 1j * rng.integers(-3, 4, (n, n))
    a = np.triu(a, 1)
    a = a + a.conj().T + np.diag(rng.integers(-3, 4, n))
    return a


def test_negcount_matches_exact_sturm_chain():
    """Exact oracle: Sturm count of the integer characteristic polynomial."""
    rng = np.random.default_rng(21)
    lam = sympy.Symbol("lam")
    for case in range(30):
        n = int(rng.integers(2, 7))
        a = _random_integer_hermitian(rng, n)
        if case % 3 == 0:
            a = a.real.astype(float)
        M = sympy.Matrix(n, n, lambda i, j: sympy.Integer(int(a[i, j].real)) + sympy.I * int(np.imag(a[i, j])))
        poly = sympy.Poly(sympy.expand(M.charpoly(lam).as_expr()), lam)
        poly = sympy.Poly(sympy.re(poly.as_expr()) if poly.has(sympy.I) else poly.as_expr(), lam)
        T = householder_tridiagonalize(HermitianMatrix(a))
        bound = int(np.abs(a).sum()) + 1
        for _ in range(8):
            y = sympy.Rational(int(rng.integers(-8 * bound, 8 * bound)), 8) + sympy.Rational(1, 997)
            if poly.eval(y) == 0:
                continue
            exact = poly.count_roots(-bound, y)
            assert negcount(T, float(y)) == exact
