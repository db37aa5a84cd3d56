import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvscad.penalty import ScadParams
from tvscad.two_pixel import (BRANCHES, NO_SHRINKAGE, POOLED, TV_POOLED, TV_SHRUNK, default_grid,
                              two_pixel_brute_force, two_pixel_brute_force_naive,
                              two_pixel_objective, two_pixel_scad, two_pixel_tv)

vals = st.floats(-300, 300)
lams = st.floats(0.1, 40)


def q_direct(y1, y2, t1, t2, penalty):
    # independent recomputation of Q from the penalty definition
    d = abs(t1 - t2)
    if isinstance(penalty, ScadParams):
        lam, a = penalty.lam, penalty.a
        if d <= lam:
            pen = lam * d
        elif d <= a * lam:
            pen = (2 * a * lam * d - d * d - lam * lam) / (2 * (a - 1))
        else:
            pen = (a + 1) * lam * lam / 2
    else:
        pen = penalty * d
    return (y1 - t1) ** 2 + (y2 - t2) ** 2 + pen


class TestScad:
    def test_no_shrinkage_example(self):
        s = two_pixel_scad(100, 0, ScadParams(10))
        assert (s.theta1, s.theta2, s.branch) == (100, 0, NO_SHRINKAGE)

    def test_pooled_example(self):
        s = two_pixel_scad(3, 0, ScadParams(10))
        assert (s.theta1, s.theta2, s.branch) == (1.5, 1.5, POOLED)

    def test_equal_inputs(self):
        s = two_pixel_scad(7.25, 7.25, ScadParams(3))
        assert (s.theta1, s.theta2) == (7.25, 7.25)
        assert s.objective == 0.0

    def test_swapped_inputs(self):
        a = two_pixel_scad(0, 100, ScadParams(10))
        assert (a.theta1, a.theta2) == (0, 100)
        b = two_pixel_scad(2, 20, ScadParams(10))
        c = two_pixel_scad(20, 2, ScadParams(10))
        assert (b.theta1, b.theta2) == pytest.approx((c.theta2, c.theta1))

    @settings(max_examples=300)
    @given(vals, vals, lams, st.floats(2.1, 6))
    def test_invariants(self, y1, y2, lam, a):
        p = ScadParams(lam, a)
        s = two_pixel_scad(y1, y2, p)
        assert s.branch in BRANCHES
        assert s.theta1 + s.theta2 == pytest.approx(y1 + y2, abs=1e-9 * (1 + abs(y1) + abs(y2)))
        if y1 >= y2:
            assert s.theta1 >= s.theta2
        if y1 - y2 > a * lam:
            assert (s.theta1, s.theta2) == (y1, y2)
        assert s.objective == pytest.approx(q_direct(y1, y2, s.theta1, s.theta2, p), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("lam", [0.3, 1.0, 3.0, 7.0, 10.0, 17.5])
    def test_knots(self, lam):
        # differences at and next to the branch knots, where rounding can pick the wrong branch
        p = ScadParams(lam)
        for knot in (lam, 2 * lam, p.a * lam):
            for d in (np.nextafter(knot, 0), knot, np.nextafter(knot, np.inf)):
                s = two_pixel_scad(d, 0.0, p)
                hw, step = default_grid(d, 0.0, p)
                o = two_pixel_brute_force(d, 0.0, p, hw, step)
                assert s.objective <= o.objective + 1e-9

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 60), lams)
    def test_matches_oracle(self, d, lam):
        p = ScadParams(lam)
        s = two_pixel_scad(d, 0.0, p)
        hw, step = default_grid(d, 0.0, p)
        step = max(step, 0.01)
        o = two_pixel_brute_force(d, 0.0, p, hw, step)
        assert s.objective <= o.objective + 1e-9
        assert o.objective - s.objective <= 2 * step**2


class TestTv:
    def test_shrunk_example(self):
        s = two_pixel_tv(10, 2, 4)
        assert (s.theta1, s.theta2, s.branch) == (8, 4, TV_SHRUNK)

    def test_boundary_pooled(self):
        s = two_pixel_tv(10, 2, 8)
        assert (s.theta1, s.theta2, s.branch) == (6, 6, TV_POOLED)

    def test_equal(self):
        assert two_pixel_tv(4, 4, 1).branch == TV_POOLED

    @settings(max_examples=300)
    @given(vals, vals, lams)
    def test_bias_is_exactly_lambda(self, y1, y2, lam):
        s = two_pixel_tv(y1, y2, lam)
        assert s.theta1 + s.theta2 == pytest.approx(y1 + y2, abs=1e-9 * (1 + abs(y1) + abs(y2)))
        if abs(y1 - y2) > lam:
            assert abs(s.theta1 - s.theta2) == pytest.approx(abs(y1 - y2) - lam, abs=1e-9 * (1 + abs(y1 - y2)))
        else:
            assert s.theta1 == s.theta2


class TestBruteForce:
    @pytest.mark.parametrize("penalty", [ScadParams(2.0), ScadParams(1.0, 5.0), 1.5, 4.0])
    def test_matches_naive(self, penalty, rng):
        for _ in range(15):
            y1, y2 = rng.uniform(-5, 15, 2)
            fast = two_pixel_brute_force(y1, y2, penalty, 3.0, 0.07)
            slow = two_pixel_brute_force_naive(y1, y2, penalty, 3.0, 0.07)
            assert fast.objective == pytest.approx(slow.objective, rel=1e-12, abs=1e-12)

    def test_degenerate_grid(self):
        s = two_pixel_brute_force(1.0, 0.0, 1.0, 0.5, 100.0)
        assert np.isfinite(s.objective)
        assert s.theta1 in (-0.5, 1.5) and s.theta2 in (-0.5, 1.5)

    def test_single_point_grid(self):
        s = two_pixel_brute_force(2.0, 2.0, ScadParams(1.0), 0.0, 1.0)
        assert (s.theta1, s.theta2, s.objective) == (2.0, 2.0, 0.0)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            two_pixel_brute_force(1.0, 0.0, 1.0, 1.0, 0.0)

    def test_examples_agree(self):
        for y1, y2, pen, expect in [(100, 0, ScadParams(10), (100, 0)), (3, 0, ScadParams(10), (1.5, 1.5)),
                                    (10, 2, 4.0, (8, 4)), (10, 2, 8.0, (6, 6))]:
            o = two_pixel_brute_force(y1, y2, pen)
            hw, step = default_grid(y1, y2, pen)
            assert o.theta1 == pytest.approx(expect[0], abs=step)
            assert o.theta2 == pytest.approx(expect[1], abs=step)

    def test_default_grid(self):
        assert default_grid(10, 0, ScadParams(2.0)) == (pytest.approx(9.4), 1e-3)
        assert default_grid(1e5, 0, ScadParams(2.0))[1] == pytest.approx(10.0)


def test_objective_vectorized():
    t = np.array([0.0, 1.0])
    np.testing.assert_allclose(two_pixel_objective(1.0, 0.0, t, t, 2.0), [1.0, 1.0])
