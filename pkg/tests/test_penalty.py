import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from tvscad.penalty import (SatvParams, ScadParams, satv_weight, scad_derivative, scad_value,
                            stationarity_lhs)

P1 = ScadParams(1.0, 3.7)

lams = st.floats(0.01, 100.0)
shapes = st.floats(2.05, 10.0)


class TestParams:
    @pytest.mark.parametrize("lam, a", [(0.0, 3.7), (-1.0, 3.7), (1.0, 2.0), (1.0, 1.5), (np.nan, 3.7)])
    def test_invalid_scad(self, lam, a):
        with pytest.raises(ValueError):
            ScadParams(lam, a)

    def test_invalid_satv(self):
        with pytest.raises(ValueError):
            SatvParams(1.0, 0.0)
        with pytest.raises(ValueError):
            SatvParams(-1.0, 10.0)

    def test_default_a(self):
        assert ScadParams(2.0).a == 3.7


class TestScadDerivative:
    def test_examples(self):
        assert scad_derivative(0.5, P1) == 1.0
        assert scad_derivative(5.0, P1) == 0.0
        assert scad_derivative(2.0, P1) == pytest.approx(1.7 / 2.7, abs=1e-12)
        assert scad_derivative(2.0, P1) == pytest.approx(0.629630, abs=1e-6)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            scad_derivative(-0.1, P1)
        with pytest.raises(ValueError):
            scad_derivative(np.array([1.0, -1.0]), P1)

    def test_array_input(self):
        out = scad_derivative(np.array([0.0, 1.0, 2.0, 10.0]), P1)
        np.testing.assert_allclose(out, [1.0, 1.0, 1.7 / 2.7, 0.0])

    @settings(max_examples=200)
    @given(lams, shapes, st.floats(0, 1), st.floats(0, 1))
    def test_shape(self, lam, a, s1, s2):
        p = ScadParams(lam, a)
        t1, t2 = sorted((s1 * 3 * a * lam, s2 * 3 * a * lam))
        d1, d2 = scad_derivative(t1, p), scad_derivative(t2, p)
        assert d2 <= d1 + 1e-12  # nonincreasing
        assert 0.0 <= d2 <= lam
        if t1 <= lam:
            assert d1 == lam
        if t2 >= a * lam:
            assert d2 == 0.0

    @settings(max_examples=100)
    @given(lams, shapes)
    def test_continuous_at_knots(self, lam, a):
        p = ScadParams(lam, a)
        h = 1e-9 * lam
        for knot in (lam, a * lam):
            assert abs(scad_derivative(knot + h, p) - scad_derivative(max(knot - h, 0), p)) < 1e-6 * lam


class TestScadValue:
    def test_examples(self):
        assert scad_value(0.0, P1) == 0.0
        assert scad_value(1.0, P1) == pytest.approx(1.0)
        assert scad_value(10.0, P1) == pytest.approx(2.35)

    def test_plateau(self):
        p = ScadParams(3.0, 3.7)
        assert scad_value(p.a * p.lam, p) == pytest.approx((p.a + 1) * p.lam**2 / 2)
        assert scad_value(1e6, p) == pytest.approx((p.a + 1) * p.lam**2 / 2)

    @pytest.mark.parametrize("lam, a", [(1.0, 3.7), (0.3, 2.5), (17.0, 3.7), (50.0, 6.0)])
    def test_matches_quadrature(self, lam, a):
        p = ScadParams(lam, a)
        for theta in np.linspace(0.0, 2 * a * lam, 41)[1:]:
            integral, _ = quad(lambda t: scad_derivative(t, p), 0.0, theta,
                               points=[x for x in (lam, a * lam) if x < theta], epsabs=0, epsrel=1e-13)
            assert abs(scad_value(theta, p) - integral) <= 1e-8 * abs(integral)

    def test_numerical_derivative(self):
        p = ScadParams(2.0, 3.7)
        h = 1e-6
        for theta in [0.5, 1.5, 3.0, 5.0, 7.0, 9.0]:
            fd = (scad_value(theta + h, p) - scad_value(theta - h, p)) / (2 * h)
            assert fd == pytest.approx(scad_derivative(theta, p), abs=1e-6)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            scad_value(-1.0, P1)


class TestStationarityLhs:
    def test_examples(self):
        assert stationarity_lhs(0.0, P1) == 1.0
        assert stationarity_lhs(5.0, P1) == 5.0
        assert stationarity_lhs(2.0, P1) == pytest.approx(3.7 / 2.7 + (1 - 1 / 2.7) * 2)
        assert stationarity_lhs(2.0, P1) == pytest.approx(2.629630, abs=1e-6)

    @settings(max_examples=300)
    @given(lams, shapes, st.floats(0, 3))
    def test_equals_x_plus_derivative(self, lam, a, s):
        p = ScadParams(lam, a)
        x = s * a * lam
        assert stationarity_lhs(x, p) == pytest.approx(x + scad_derivative(x, p), rel=1e-13, abs=1e-13)

    @settings(max_examples=300)
    @given(lams, shapes, st.floats(1e-6, 3), st.floats(1e-6, 3))
    def test_strictly_increasing(self, lam, a, s1, s2):
        p = ScadParams(lam, a)
        x1, x2 = sorted((s1 * a * lam, s2 * a * lam))
        if x2 > x1 * (1 + 1e-9):
            assert stationarity_lhs(x2, p) > stationarity_lhs(x1, p)

    def test_infimum_is_lambda(self):
        p = ScadParams(4.0, 3.7)
        xs = np.linspace(1e-9, 30, 10001)
        assert np.min(stationarity_lhs(xs, p)) >= p.lam
        assert stationarity_lhs(1e-12, p) == pytest.approx(p.lam)


class TestSatvWeight:
    def test_examples(self):
        assert satv_weight(0, 0, 10) == pytest.approx(0.2)
        assert satv_weight(90, 0, 10) == pytest.approx(0.11)
        assert satv_weight(np.inf, np.inf, 10) == 0.0
        assert satv_weight(1e12, 1e12, 10) < 1e-11

    def test_bad_e(self):
        with pytest.raises(ValueError):
            satv_weight(0, 0, 0)
        with pytest.raises(ValueError):
            satv_weight(0, 0, -1)

    @settings(max_examples=200)
    @given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(1e-3, 1e3))
    def test_bounded_and_symmetric(self, gx, gy, e):
        w = satv_weight(gx, gy, e)
        assert 0 < w <= 2 / e
        assert w == satv_weight(-gx, gy, e) == satv_weight(gx, -gy, e) == satv_weight(-gx, -gy, e)


@settings(max_examples=300)
@given(lams, shapes, st.floats(0, 3), st.floats(0, 3))
def test_tangent_line_majorizes(lam, a, s0, s):
    # concave penalty lies below every tangent line
    p = ScadParams(lam, a)
    g0, g = s0 * a * lam, s * a * lam
    bound = scad_value(g0, p) + scad_derivative(g0, p) * (g - g0)
    assert scad_value(g, p) <= bound + 1e-12 * max(1.0, lam**2)
