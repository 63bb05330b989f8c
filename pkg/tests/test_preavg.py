import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import ma_autocorr, preaverage_loops, psi_loops
from spotvol.core import ConfigError, ObservationSeries, WeightFunction, triangle_weight
from spotvol.preavg import phi, preaverage, preaverage_boundary, psi, psi_prime

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_constant_series_gives_zeros():
    out = preaverage(ObservationSeries(np.full(101, 3.7)), 7, triangle_weight)
    assert out.values.shape == (14,)
    assert np.all(out.values == 0)


def test_linear_series_hand_value():
    out = preaverage(ObservationSeries(np.arange(17.0)), 4, triangle_weight)
    np.testing.assert_allclose(out.values, 1.0, rtol=0, atol=1e-15)


def test_matches_loop_oracle():
    y = np.cumsum(np.random.default_rng(4).standard_normal(1001))
    out = preaverage(ObservationSeries(y), 13, triangle_weight)
    np.testing.assert_allclose(out.values, preaverage_loops(y, 13), rtol=1e-12, atol=1e-12)
    assert out.phi2 == pytest.approx(phi(2, 13, triangle_weight))
    assert out.block == pytest.approx(13 / 1000)
    assert out.times[0] == pytest.approx(13 / 1000)


@given(arrays(float, st.integers(20, 200), elements=finite), st.integers(2, 10))
def test_boundary_form_agrees(y, p):
    obs = ObservationSeries(y)
    a = preaverage(obs, p, triangle_weight).values
    b = preaverage_boundary(obs, p, triangle_weight)
    scale = max(1.0, float(np.max(np.abs(y))))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12 * scale * p)


@given(arrays(float, 60, elements=finite), arrays(float, 60, elements=finite), finite, finite)
def test_linearity(y, z, alpha, beta):
    f = lambda v: preaverage(ObservationSeries(v), 6, triangle_weight).values
    lhs = f(alpha * y + beta * z)
    rhs = alpha * f(y) + beta * f(z)
    scale = 1.0 + np.max(np.abs(alpha * y)) + np.max(np.abs(beta * z))
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-11 * scale)


def test_window_out_of_range():
    obs = ObservationSeries(np.zeros(11))
    for p in (1, 11, 2.5):
        with pytest.raises(ConfigError):
            preaverage(obs, p, triangle_weight)


def test_phi_examples():
    assert phi(0, 10, triangle_weight) == pytest.approx(0.9)
    assert phi(1, 4, triangle_weight) == pytest.approx(0.25)
    assert abs(phi(2, 114, triangle_weight) - 1 / 12) < 0.01


@given(st.integers(2, 300), st.floats(0, 2), st.floats(0, 2))
def test_phi_nonincreasing_in_theta(p, t1, t2):
    lo, hi = sorted((t1, t2))
    assert phi(hi, p, triangle_weight) <= phi(lo, p, triangle_weight) + 1e-15


def test_psi_prime_triangle():
    val = psi_prime(114, triangle_weight)
    assert 0.98 <= val <= 1.001
    assert psi(114, triangle_weight, lambda k: 1.0 if k == 0 else 0.0, 0) == val


def test_psi_prime_scales_quadratically():
    doubled = WeightFunction(lambda x: 2.0 * triangle_weight(x), "double-triangle")
    assert psi_prime(50, doubled) == pytest.approx(4 * psi_prime(50, triangle_weight), rel=1e-14)


@pytest.mark.parametrize("s, d", [(-0.4, 5), (-0.2, 10), (0.3, 7), (0.0, 15)])
def test_psi_matches_double_sum(s, d):
    rho = lambda k: ma_autocorr(s, d, k)
    assert psi(114, triangle_weight, rho, d) == pytest.approx(psi_loops(114, rho, d), rel=1e-12)


@pytest.mark.parametrize(
    "s, d, table",
    [(-0.4, 5, 0.13217), (-0.4, 10, 0.10384), (-0.4, 15, 0.09652),
     (-0.2, 5, 0.38213), (-0.2, 10, 0.31965), (-0.2, 15, 0.29614),
     (0.0, 5, 0.99130), (0.0, 10, 0.99130), (0.0, 15, 0.99130)],
)
def test_psi_table(s, d, table):
    assert abs(psi(114, triangle_weight, lambda k: ma_autocorr(s, d, k), d) - table) < 0.01


@given(st.integers(0, 20), st.floats(-0.49, 0.49))
def test_psi_bounded(d, s):
    val = psi(114, triangle_weight, lambda k: ma_autocorr(s, d, k), d)
    assert np.isfinite(val) and abs(val) <= (2 * d + 1) * (1 + 1e-12)
