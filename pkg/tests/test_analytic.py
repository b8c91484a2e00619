"""Closed-form operations: examples, oracles, and invariants."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cluster_weight_sum, mean_cluster_size_sum
from qperc.analytic import (
    ExponentSet,
    ModelParams,
    classical_spanning_probability,
    cluster_number,
    cluster_weight,
    characteristic_cluster_size,
    correlation_length,
    critical_occupation,
    declared_exponents,
    filtering_probability,
    mean_cluster_size,
    mean_cluster_size_series,
    pair_connectivity,
    scaling_law_audit,
)
from qperc.errors import DivergenceError, DomainError

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestFilteringProbability:
    def test_maximum_at_half(self):
        assert filtering_probability(0.5) == 0.5

    def test_product_state(self):
        assert filtering_probability(0.0) == 0.0

    def test_direct_arithmetic(self):
        assert filtering_probability(0.1) == pytest.approx(0.18, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            filtering_probability(1.2)
        with pytest.raises(DomainError):
            filtering_probability(-0.1)

    @given(unit)
    def test_symmetric_and_bounded(self, tau):
        f = filtering_probability(tau)
        assert f == pytest.approx(filtering_probability(1.0 - tau), abs=1e-15)
        assert 0.0 <= f <= 0.5


class TestCriticalOccupation:
    @pytest.mark.parametrize(
        "p_e,expected", [(0.25, 0.75), (0.0, 1.0), (0.49, 0.51)]
    )
    def test_values(self, p_e, expected):
        assert critical_occupation(p_e) == pytest.approx(expected, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            critical_occupation(1.5)


class TestModelParams:
    def test_tau_derives_pe(self):
        params = ModelParams(p=0.3, tau_schmidt=0.5)
        assert params.p_e == 0.5

    def test_tau_implies_pe_at_most_half(self):
        for tau in (0.1, 0.3, 0.7, 0.95):
            assert ModelParams(p=0.0, tau_schmidt=tau).p_e <= 0.5

    def test_conflicting_pe_and_tau(self):
        with pytest.raises(DomainError):
            ModelParams(p=0.3, p_e=0.3, tau_schmidt=0.5)

    def test_requires_one_of_pe_tau(self):
        with pytest.raises(DomainError):
            ModelParams(p=0.3)

    @pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan")])
    def test_range_validation(self, bad):
        with pytest.raises(DomainError):
            ModelParams(p=bad, p_e=0.2)
        with pytest.raises(DomainError):
            ModelParams(p=0.2, p_e=bad)


class TestClusterWeight:
    def test_classical_single_edge(self):
        # reduces to p*(1-p)^2
        assert cluster_weight(1, ModelParams(p=0.5, p_e=0.0)) == pytest.approx(
            0.125, abs=1e-15
        )

    def test_two_edge_default_sum(self):
        params = ModelParams(p=0.3, p_e=0.2)
        expected = cluster_weight_sum(2, 0.3, 0.2, i0=1)
        assert expected == pytest.approx(0.0658560, abs=1e-10)
        assert cluster_weight(2, params) == pytest.approx(expected, rel=1e-12)

    def test_two_edge_include_zero_open(self):
        params = ModelParams(p=0.3, p_e=0.2)
        expected = cluster_weight_sum(2, 0.3, 0.2, i0=0)
        assert expected == pytest.approx(0.0784, abs=1e-12)
        assert cluster_weight(2, params, include_zero_open=True) == pytest.approx(
            expected, rel=1e-12
        )

    def test_zero_size_rejected(self):
        with pytest.raises(DomainError):
            cluster_weight(0, ModelParams(p=0.3, p_e=0.2))

    def test_closed_form_matches_sum_on_grid(self):
        # binomial-sum oracle over a parameter grid, sizes up to 64
        grid = [i * 0.05 for i in range(21)]
        for p in grid:
            for p_e in grid:
                params = ModelParams(p=p, p_e=p_e)
                for s in (1, 2, 3, 7, 16, 33, 64):
                    for i0_flag in (False, True):
                        expected = cluster_weight_sum(s, p, p_e, i0=0 if i0_flag else 1)
                        got = cluster_weight(s, params, include_zero_open=i0_flag)
                        assert got == pytest.approx(expected, rel=1e-12, abs=1e-300)

    @given(
        st.floats(min_value=0.01, max_value=0.99),
        st.floats(min_value=0.01, max_value=0.99),
        st.integers(min_value=1, max_value=64),
    )
    @settings(max_examples=200)
    def test_closed_form_matches_sum_property(self, p, p_e, s):
        got = cluster_weight(s, ModelParams(p=p, p_e=p_e))
        expected = cluster_weight_sum(s, p, p_e, i0=1)
        assert got == pytest.approx(expected, rel=1e-11, abs=1e-300)


class TestClusterNumber:
    def test_single_edge(self):
        assert cluster_number(1, ModelParams(p=0.5, p_e=0.0)) == pytest.approx(0.125)

    def test_half_of_weight(self):
        params = ModelParams(p=0.3, p_e=0.2)
        assert cluster_number(2, params) == pytest.approx(0.0329280, abs=1e-10)

    def test_pure_entanglement_chain(self):
        params = ModelParams(p=0.0, p_e=0.2)
        expected = 0.2**3 * 0.64 / 3
        got = cluster_number(3, params, include_zero_open=True)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(0.0017067, abs=5e-8)


class TestMeanClusterSize:
    def test_reference_point(self):
        # geometric-series oracle; equals (2 - 0.3125)/(1 - 0.25)
        got = mean_cluster_size(ModelParams(p=0.3, p_e=0.2))
        assert got == pytest.approx(2.25, abs=1e-12)
        assert got == pytest.approx(mean_cluster_size_sum(0.3, 0.2, s_max=300), rel=1e-12)

    def test_classical_limits_no_filtering(self):
        # with p_e = 0 the defining ratio gives 1/(1-p); the size-weighted
        # variant recovers the classical (1+p)/(1-p)
        params = ModelParams(p=0.5, p_e=0.0)
        assert mean_cluster_size(params) == pytest.approx(2.0, rel=1e-12)
        assert mean_cluster_size(params, size_weighted=True) == pytest.approx(
            3.0, rel=1e-12
        )
        assert mean_cluster_size(params, size_weighted=True) == pytest.approx(
            mean_cluster_size_sum(0.5, 0.0, size_weighted=True), rel=1e-10
        )

    def test_divergence_at_threshold(self):
        with pytest.raises(DivergenceError):
            mean_cluster_size(ModelParams(p=0.75, p_e=0.25))
        with pytest.raises(DivergenceError):
            mean_cluster_size(ModelParams(p=0.8, p_e=0.25))

    def test_divergence_rate_near_threshold(self):
        # S * (p_c - p) approaches a finite constant (1) at the transition
        p_e = 0.25
        vals = []
        for eps in (1e-2, 1e-3, 1e-4):
            s = mean_cluster_size(ModelParams(p=0.75 - eps, p_e=p_e))
            vals.append(s * eps)
        assert abs(vals[2] - 1.0) < 0.01
        assert abs(vals[2] - 1.0) < abs(vals[0] - 1.0)

    def test_strictly_increasing_in_p(self):
        p_e = 0.2
        values = [
            mean_cluster_size(ModelParams(p=p / 100, p_e=p_e)) for p in range(5, 80, 5)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_series_converges_to_closed_form(self):
        params = ModelParams(p=0.3, p_e=0.2)
        closed = mean_cluster_size(params)
        errors = []
        for s_max in (5, 10, 20, 40, 80):
            sv = mean_cluster_size_series(params, s_max)
            errors.append(abs(sv.value - closed))
            assert abs(sv.value - closed) <= sv.truncation_bound
        assert errors[-1] < errors[0]
        assert errors[-1] < 1e-12

    def test_series_bound_holds_near_threshold(self):
        params = ModelParams(p=0.7, p_e=0.25)
        closed = mean_cluster_size(params)
        for s_max in (20, 100, 400):
            sv = mean_cluster_size_series(params, s_max)
            assert abs(sv.value - closed) <= sv.truncation_bound

    def test_include_zero_open_variant(self):
        # with the i0 = 0 sum the ratio collapses to 1/(1 - p - p_e)
        params = ModelParams(p=0.3, p_e=0.2)
        got = mean_cluster_size(params, include_zero_open=True)
        assert got == pytest.approx(2.0, rel=1e-12)
        assert got == pytest.approx(
            mean_cluster_size_sum(0.3, 0.2, i0=0), rel=1e-12
        )


class TestPairConnectivity:
    def test_self_connection(self):
        assert pair_connectivity(0, ModelParams(p=0.3, p_e=0.2)) == 1.0

    def test_two_steps(self):
        assert pair_connectivity(2, ModelParams(p=0.3, p_e=0.2)) == pytest.approx(
            0.25, abs=1e-15
        )

    def test_at_threshold_base_one(self):
        assert pair_connectivity(4, ModelParams(p=0.75, p_e=0.25)) == 1.0

    def test_additive_overflow_rejected(self):
        with pytest.raises(DomainError):
            pair_connectivity(2, ModelParams(p=0.8, p_e=0.5))

    @given(st.integers(min_value=0, max_value=200))
    @settings(max_examples=50)
    def test_ratio_is_q(self, r):
        params = ModelParams(p=0.3, p_e=0.2)
        g_r = pair_connectivity(r, params)
        g_r1 = pair_connectivity(r + 1, params)
        assert g_r1 / g_r == pytest.approx(params.q, rel=1e-14)


class TestCorrelationLength:
    def test_unit_length(self):
        assert correlation_length(
            ModelParams(p=math.exp(-1.0), p_e=0.0)
        ) == pytest.approx(1.0, rel=1e-12)

    def test_reference_point(self):
        got = correlation_length(ModelParams(p=0.3, p_e=0.2))
        assert got == pytest.approx(1.4426950408889634, rel=1e-12)

    def test_near_threshold_expansion(self):
        got = correlation_length(ModelParams(p=0.73, p_e=0.25))
        assert abs(got - 50.0) / 50.0 < 0.05

    def test_domain(self):
        with pytest.raises(DomainError):
            correlation_length(ModelParams(p=0.75, p_e=0.25))
        with pytest.raises(DomainError):
            correlation_length(ModelParams(p=0.0, p_e=0.0))

    def test_characteristic_size_same_formula(self):
        params = ModelParams(p=0.3, p_e=0.2)
        assert characteristic_cluster_size(params) == correlation_length(params)


class TestDeclaredExponents:
    def test_values(self):
        e = declared_exponents()
        assert e == ExponentSet(gamma=1.0, sigma=1.0, nu=1.0, tau_fisher=2.0, beta=1.0)


class TestScalingLawAudit:
    def test_beta_relation_violated(self):
        audit = scaling_law_audit(declared_exponents())
        rel = audit.relations[0]
        assert rel.relation.startswith("beta")
        assert rel.left == 1.0 and rel.right == 0.0
        assert not rel.holds

    def test_gamma_relation_holds(self):
        rel = scaling_law_audit(declared_exponents()).relations[1]
        assert rel.left == 1.0 and rel.right == 1.0 and rel.holds

    def test_hyperscaling_relation_holds_in_1d(self):
        rel = scaling_law_audit(declared_exponents(), dimension=1).relations[2]
        assert rel.left == 1.0 and rel.right == 1.0 and rel.holds

    def test_zero_sigma_rejected(self):
        with pytest.raises(DomainError):
            scaling_law_audit(ExponentSet(1, 0, 1, 2, 1))


class TestClassicalSpanning:
    def test_perfect_channels(self):
        assert classical_spanning_probability(1.0, 10**6) == 1.0

    def test_long_chain_suppression(self):
        assert classical_spanning_probability(0.9, 100) == pytest.approx(
            2.656e-5, rel=1e-3
        )

    def test_ten_fair_channels(self):
        assert classical_spanning_probability(0.5, 10) == 1.0 / 1024.0

    def test_domain(self):
        with pytest.raises(DomainError):
            classical_spanning_probability(0.5, -1)
        with pytest.raises(DomainError):
            classical_spanning_probability(1.5, 2)
