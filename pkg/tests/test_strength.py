"""Percolation strength: closed form vs the self-consistency iteration."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qperc.analytic import (
    ModelParams,
    percolation_strength_closed,
    percolation_strength_fixed_point,
    strength_root_residual,
)
from qperc.errors import DomainError

interior = st.floats(min_value=0.01, max_value=0.99)


class TestClosedForm:
    def test_threshold_onset(self):
        sol = percolation_strength_closed(ModelParams(p=0.75, p_e=0.25))
        assert sol.strength_p == 0.0
        assert sol.product_x == 1.0
        assert sol.root_used == "trivial_unit"

    def test_all_channels_open(self):
        for p_e in (0.01, 0.25, 0.49):
            sol = percolation_strength_closed(ModelParams(p=1.0, p_e=p_e))
            assert sol.strength_p == 1.0
            assert sol.root_used == "physical"

    def test_delayed_release_point(self):
        sol = percolation_strength_closed(ModelParams(p=0.6, p_e=0.49))
        expected = 1.0 - (0.4 * 0.51 / (0.6 * 0.49)) ** 2
        assert sol.strength_p == pytest.approx(expected, abs=1e-15)
        assert sol.strength_p == pytest.approx(0.518534, abs=1e-6)

    def test_no_resources_trivial(self):
        for p, p_e in ((0.0, 0.3), (0.7, 0.0), (0.0, 0.0), (1.0, 0.0)):
            sol = percolation_strength_closed(ModelParams(p=p, p_e=p_e))
            assert sol.strength_p == 0.0
            assert sol.root_used == "trivial_unit"

    def test_zero_at_and_below_threshold(self):
        for p_e in (0.25, 0.5):
            p_c = 1.0 - p_e
            for p in (0.0, p_c / 2, p_c):
                sol = percolation_strength_closed(ModelParams(p=p, p_e=p_e))
                assert sol.strength_p == 0.0

    def test_strictly_increasing_above_threshold(self):
        p_e = 0.25
        values = [
            percolation_strength_closed(ModelParams(p=0.75 + k / 100, p_e=p_e)).strength_p
            for k in range(1, 26)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[0] > 0.0

    @given(interior, interior)
    @settings(max_examples=300)
    def test_product_one_iff_strength_zero(self, p, p_e):
        sol = percolation_strength_closed(ModelParams(p=p, p_e=p_e))
        assert (sol.product_x == 1.0) == (sol.strength_p == 0.0)
        assert sol.strength_p == max(0.0, 1.0 - sol.product_x**2)


class TestRootIdentity:
    def test_unit_root_residual_on_grid(self):
        worst = 0.0
        for ip in range(1, 100):
            for ie in range(1, 50):
                params = ModelParams(p=ip / 100, p_e=ie / 100)
                worst = max(worst, abs(strength_root_residual(params, 1.0)))
        assert worst < 1e-14

    @given(interior, interior)
    @settings(max_examples=300)
    def test_unit_root_residual_property(self, p, p_e):
        assert abs(strength_root_residual(ModelParams(p=p, p_e=p_e), 1.0)) < 1e-14


class TestFixedPoint:
    def test_reference_solution(self):
        sol = percolation_strength_fixed_point(ModelParams(p=0.8, p_e=0.25))
        assert sol.product_x == pytest.approx(0.75, abs=1e-10)
        assert sol.q_open == pytest.approx(0.8, abs=1e-10)
        assert sol.q_pair == pytest.approx(0.9375, abs=1e-10)
        assert sol.strength_p == pytest.approx(0.4375, abs=1e-10)
        # confirm it is a true fixed point of both equations
        p, p_e = 0.8, 0.25
        x = sol.q_open * sol.q_pair
        assert sol.q_open == pytest.approx((1 - p) + p * x, abs=1e-12)
        assert sol.q_pair == pytest.approx((1 - p_e) + p_e * x, abs=1e-12)

    def test_no_filtering_trivial(self):
        sol = percolation_strength_fixed_point(ModelParams(p=0.5, p_e=0.0))
        assert sol.q_open == 1.0 and sol.q_pair == 1.0
        assert sol.strength_p == 0.0

    def test_threshold_case(self):
        sol = percolation_strength_fixed_point(ModelParams(p=0.75, p_e=0.25))
        assert sol.product_x == pytest.approx(1.0, abs=1e-9)
        assert sol.strength_p <= 1e-10

    def test_tolerance_validation(self):
        with pytest.raises(DomainError):
            percolation_strength_fixed_point(ModelParams(p=0.5, p_e=0.2), tolerance=0.0)

    def test_agrees_with_closed_form_default_tolerance(self):
        # contract: agreement within 10x the iteration tolerance
        for p, p_e in ((0.3, 0.2), (0.9, 0.49), (0.52, 0.49), (0.99, 0.01), (0.6, 0.4)):
            closed = percolation_strength_closed(ModelParams(p=p, p_e=p_e))
            fixed = percolation_strength_fixed_point(ModelParams(p=p, p_e=p_e))
            assert fixed.strength_p == pytest.approx(closed.strength_p, abs=1e-11)

    @given(interior, st.floats(min_value=0.01, max_value=0.49))
    @settings(max_examples=200, deadline=None)
    def test_agreement_property(self, p, p_e):
        closed = percolation_strength_closed(ModelParams(p=p, p_e=p_e))
        fixed = percolation_strength_fixed_point(ModelParams(p=p, p_e=p_e))
        assert abs(closed.strength_p - fixed.strength_p) <= 1e-10
