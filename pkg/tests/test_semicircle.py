import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wignerclt import semicircle as sc

# F(1) by 30-digit mpmath quadrature of the density
F_AT_ONE = 0.804498890522114679
# x_n at (y=0.5, x=1, n=1e6) by mpmath quadrature + root finding
X_N_ORACLE = 1.00000018096298053
# t'(0.3) = 1/rho(t(0.3)) from the same mpmath oracle
TPRIME_03 = 3.31558919656625870


def _quad_cdf(y):
    return quad(sc.rho_sc_density, -2.0, y, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def test_density_values():
    assert sc.rho_sc_density(0.0) == pytest.approx(1 / math.pi, abs=1e-15)
    assert sc.rho_sc_density(2.0) == 0.0
    assert sc.rho_sc_density(-2.0) == 0.0
    assert sc.rho_sc_density(3.0) == 0.0


def test_density_integrates_to_one():
    total, _ = quad(sc.rho_sc_density, -2, 2, epsabs=1e-13, epsrel=1e-13)
    assert abs(total - 1.0) <= 1e-10


def test_cdf_examples():
    assert sc.semicircle_cdf(0.0) == 0.5
    assert sc.semicircle_cdf(-2.0) == 0.0
    assert sc.semicircle_cdf(2.0) == 1.0
    assert sc.semicircle_cdf(-5.0) == 0.0
    assert sc.semicircle_cdf(7.0) == 1.0
    assert sc.semicircle_cdf(1.0) == pytest.approx(F_AT_ONE, abs=1e-14)


@given(st.floats(-2.5, 2.5))
def test_cdf_symmetry(y):
    assert abs(sc.semicircle_cdf(y) + sc.semicircle_cdf(-y) - 1.0) <= 1e-14


def test_cdf_matches_quadrature_at_random_points():
    rng = np.random.default_rng(7)
    ys = rng.uniform(-2, 2, 1000)
    ours = sc.semicircle_cdf(ys)
    ref = np.array([_quad_cdf(y) for y in ys])
    assert np.max(np.abs(ours - ref)) <= 1e-10


def test_cdf_monotone():
    ys = np.linspace(-2.2, 2.2, 10001)
    assert np.all(np.diff(sc.semicircle_cdf(ys)) >= 0)


def test_quantile_examples():
    assert sc.quantile(0.5) == 0.0
    assert sc.quantile(0.0) == -2.0
    assert sc.quantile(1.0) == 2.0
    assert sc.quantile(0.8044989) == pytest.approx(1.0, abs=1e-6)
    assert sc.quantile(F_AT_ONE) == pytest.approx(1.0, abs=1e-8)


def test_quantile_rejects_out_of_range():
    with pytest.raises(ValueError):
        sc.quantile(1.5)
    with pytest.raises(ValueError):
        sc.quantile(-0.1)


def test_quantile_inverts_cdf_on_grid():
    ys = np.linspace(-1.99, 1.99, 4001)
    assert np.max(np.abs(sc.quantile(sc.semicircle_cdf(ys)) - ys)) <= 1e-8


def test_cdf_of_quantile_near_edges():
    q = np.concatenate([np.geomspace(1e-6, 0.5, 300), 1 - np.geomspace(1e-6, 0.5, 300)])
    assert np.max(np.abs(sc.semicircle_cdf(sc.quantile(q)) - q)) <= 1e-10


@given(st.floats(1e-6, 1 - 1e-6))
def test_quantile_property(q):
    assert abs(sc.semicircle_cdf(sc.quantile(q)) - q) <= 1e-10


def test_quantile_derivative():
    assert sc.quantile_derivative(0.5) == pytest.approx(math.pi, rel=1e-14)
    assert sc.quantile_derivative(0.3) == pytest.approx(TPRIME_03, rel=1e-10)
    assert sc.quantile_derivative(0.2) == pytest.approx(sc.quantile_derivative(0.8), rel=1e-10)
    h, q = 1e-6, 0.3
    fd = (sc.quantile(q + h) - sc.quantile(q - h)) / (2 * h)
    assert abs(fd - sc.quantile_derivative(q)) <= 1e-6
    with pytest.raises(ValueError):
        sc.quantile_derivative(1e-8)
    with pytest.raises(ValueError):
        sc.quantile_derivative(1.0)


def test_predict_values():
    p = sc.predict(4096, 0.0, 2)
    assert p.mean == 2048.0
    assert p.variance == pytest.approx(0.421383, abs=5e-7)
    assert p.sigma_numerics == pytest.approx(math.sqrt(p.variance))
    p1 = sc.predict(4096, 0.3, 1)
    p2 = sc.predict(4096, 0.3, 2)
    assert p1.variance / p2.variance == 2.0
    assert p1.mean == p2.mean


def test_predict_mean_exact_at_center():
    for n in (2, 10, 512, 65536):
        assert sc.predict(n, 0.0).mean == n / 2


def test_predict_near_left_edge():
    assert sc.predict(2, -2 + 1e-12).mean == pytest.approx(2.0, abs=1e-10)


def test_predict_rejects_edges():
    for y in (-2.0, 2.0, 3.0):
        with pytest.raises(ValueError):
            sc.predict(100, y)
    with pytest.raises(ValueError):
        sc.predict(1, 0.0)


def test_clt_normalize():
    p = sc.predict(4096, 0.0, 2)
    assert sc.clt_normalize(p.mean, p) == 0.0
    # 2 / sqrt(ln(4096) / (2 pi^2)) evaluated directly
    assert sc.clt_normalize(2050, p) == pytest.approx(3.0809987, abs=1e-6)
    c, k = 2040, 7
    assert sc.clt_normalize(c + k, p) - sc.clt_normalize(c, p) == pytest.approx(k / p.sigma_numerics)
    arr = sc.clt_normalize(np.array([2048, 2050]), p)
    assert arr.shape == (2,)


def test_fluctuation_params():
    n = 16384
    center, std = sc.fluctuation_params(n // 2, n)
    assert center == 0.0
    assert std == pytest.approx(1.3444e-4, rel=1e-4)
    assert std == pytest.approx(math.sqrt(math.log(n) / 2) / n, rel=1e-14)
    _, s1 = sc.fluctuation_params(1000, n)
    _, s2 = sc.fluctuation_params(n - 1000, n)
    assert s1 == pytest.approx(s2, rel=1e-9)
    idx = np.arange(n // 2, int(0.98 * n), 97)
    _, stds = sc.fluctuation_params(idx, n)
    assert np.all(np.diff(stds) > 0)


def test_fluctuation_params_rejects_edge():
    for i in (1, 100, 16300):
        with pytest.raises(ValueError):
            sc.fluctuation_params(i, 10000 if i == 100 else 16384)


def test_clt_index_map():
    i_n, x_n = sc.clt_index_map(0.0, 0.0, 1000)
    assert i_n == 500.0 and x_n == 0.0
    i_n, x_n = sc.clt_index_map(0.5, 1.0, 10**6)
    assert abs(x_n - 1.0) <= 0.05
    assert x_n == pytest.approx(X_N_ORACLE, abs=1e-6)
    for x in (0.3, 1.0, 2.5):
        assert sc.clt_index_map(0.0, -x, 5000)[1] == pytest.approx(
            -sc.clt_index_map(0.0, x, 5000)[1], abs=1e-9)


def test_clt_index_map_converges_on_grid():
    for n in (100, 10**4, 10**6):
        bound = 10 / math.sqrt(math.log(n))
        for y in np.linspace(-1, 1, 9):
            for x in np.linspace(-3, 3, 13):
                assert abs(sc.clt_index_map(y, x, n)[1] - x) <= bound


def test_rigidity_window():
    n, C = 10000, 1.0
    polylog = math.log(n) ** (C * math.log(math.log(n)))
    assert sc.rigidity_window(n // 2, n, C) == pytest.approx(polylog * 2 ** (1 / 3) / n, rel=1e-12)
    assert sc.rigidity_window(1, n, C) == pytest.approx(polylog * n ** (-2 / 3), rel=1e-12)
    for i in (1, 17, 2500, 5000):
        assert sc.rigidity_window(i, n, C) == pytest.approx(sc.rigidity_window(n - i + 1, n, C))
    with pytest.raises(ValueError):
        sc.rigidity_window(0, n, C)
    with pytest.raises(ValueError):
        sc.rigidity_window(5, n, 0.0)


@settings(max_examples=50)
@given(st.integers(2, 10**6), st.floats(0.01, 3))
def test_rigidity_window_symmetric(n, C):
    i = max(1, n // 3)
    assert sc.rigidity_window(i, n, C) == pytest.approx(sc.rigidity_window(n - i + 1, n, C))
