"""Exponent estimators and the comparison report."""

import numpy as np
import pytest

from qperc import analysis, mc
from qperc.analytic import (
    ModelParams,
    critical_occupation,
    declared_exponents,
    mean_cluster_size,
)
from qperc.errors import DomainError, EstimationError


class TestFitPowerLaw:
    def test_identity(self):
        fit = analysis.fit_power_law([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert fit.exponent_estimate == pytest.approx(1.0, abs=1e-14)
        assert fit.r_squared == 1.0

    def test_quadratic_exact(self):
        xs = np.linspace(0.5, 4.0, 9)
        fit = analysis.fit_power_law(xs, 3.7 * xs**2)
        assert fit.exponent_estimate == pytest.approx(2.0, abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-12)

    def test_mean_cluster_size_slope(self):
        p_e = 0.25
        eps = np.geomspace(0.02, 0.2, 12)
        s_vals = [mean_cluster_size(ModelParams(p=0.75 - e, p_e=p_e)) for e in eps]
        fit = analysis.fit_power_law(eps, s_vals)
        assert fit.exponent_estimate == pytest.approx(-1.0, abs=0.1)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            analysis.fit_power_law([1.0], [2.0])
        with pytest.raises(DomainError):
            analysis.fit_power_law([1.0, -1.0], [2.0, 3.0])
        with pytest.raises(DomainError):
            analysis.fit_power_law([1.0, 2.0], [0.0, 3.0])


class TestGamma:
    def test_analytic_band(self):
        fit = analysis.estimate_gamma(0.25)
        assert 0.9 <= fit.exponent_estimate <= 1.1
        assert fit.r_squared > 0.999

    def test_classical_no_filtering(self):
        fit = analysis.estimate_gamma(0.0)
        assert fit.exponent_estimate == pytest.approx(1.0, abs=1e-10)

    def test_grid_above_threshold_rejected(self):
        with pytest.raises(DomainError):
            analysis.estimate_gamma(0.25, p_grid=[0.7, 0.75], s_values=[10.0, 20.0])


class TestNu:
    def test_analytic_band(self):
        fit = analysis.estimate_nu(0.25)
        assert 0.9 <= fit.exponent_estimate <= 1.1

    def test_single_p_rejected(self):
        tables = {0.5: ([0, 1, 2], [1.0, 0.5, 0.25])}
        with pytest.raises(DomainError):
            analysis.estimate_nu(0.25, g_tables=tables)

    def test_correlation_length_from_exact_table(self):
        params = ModelParams(p=0.3, p_e=0.2)
        rs, gs = analysis.analytic_g_table(params, 15)
        xi = analysis.correlation_length_from_g(rs, gs)
        assert xi == pytest.approx(1.4426950408889634, rel=1e-10)


class TestSigma:
    def test_analytic_band(self):
        fit = analysis.estimate_sigma(0.25)
        assert 0.9 <= fit.exponent_estimate <= 1.1

    def test_classical_cutoff_value(self):
        ss, ws = analysis.analytic_weight_tail(ModelParams(p=0.5, p_e=0.0))
        cutoff = analysis.cutoff_from_weight_tail(ss, ws)
        assert cutoff == pytest.approx(1.4426950408889634, rel=1e-6)

    def test_unresolvable_tail(self):
        with pytest.raises(EstimationError):
            analysis.cutoff_from_weight_tail([1, 2], [1.0, 0.9])


class TestBeta:
    def test_analytic_band(self):
        fit = analysis.estimate_beta(0.25)
        assert 0.95 <= fit.exponent_estimate <= 1.05

    def test_invariant_window_slope(self):
        # log-log slope over (p_c, p_c + 0.03] within 0.05 of 1
        fit = analysis.estimate_beta(0.25, window=(1e-4, 0.03))
        assert abs(fit.exponent_estimate - 1.0) <= 0.05

    def test_high_filtering(self):
        fit = analysis.estimate_beta(0.49)
        assert 0.95 <= fit.exponent_estimate <= 1.05

    def test_synthetic_linear_exact(self):
        p_c = critical_occupation(0.25)
        delta = np.geomspace(1e-3, 0.04, 10)
        fit = analysis.estimate_beta(0.25, p_grid=p_c + delta, strength_values=2.5 * delta)
        assert fit.exponent_estimate == pytest.approx(1.0, abs=1e-12)

    def test_grid_validation(self):
        p_c = critical_occupation(0.25)
        with pytest.raises(DomainError):
            analysis.estimate_beta(0.25, p_grid=[p_c, p_c + 0.01],
                                   strength_values=[0.0, 0.1])
        with pytest.raises(DomainError):
            analysis.estimate_beta(0.25, p_grid=[p_c + 0.01, p_c + 0.06],
                                   strength_values=[0.1, 0.5])


class TestTauFromScaling:
    def test_declared_round_trip(self):
        e = declared_exponents()
        assert analysis.tau_from_scaling(e.gamma, e.sigma) == 2.0

    def test_arithmetic(self):
        assert analysis.tau_from_scaling(2.0, 1.0) == 1.0

    def test_fitted_round_trip(self):
        gamma = analysis.estimate_gamma(0.25)
        sigma = analysis.estimate_sigma(0.25)
        tau, err = analysis.tau_from_scaling_fit(gamma, sigma)
        assert abs(tau - 2.0) <= 0.3
        assert err >= 0.0


class TestMonteCarloSourced:
    @pytest.fixture(scope="class")
    def sweep(self):
        p_e = 0.25
        p_c = critical_occupation(p_e)
        eps = analysis.default_eps_grid(analysis.GAMMA_WINDOW, 6)
        grid = [(float(p_c - e), p_e) for e in eps]
        return mc.run_sweep(
            grid, "paper_additive", length_nodes=200_000, trials=15,
            master_seed=42, r_max=20, collect_histograms=True,
        )

    def test_gamma_band(self, sweep):
        fit = analysis.estimate_gamma(
            0.25,
            p_grid=[r.p for r in sweep.rows],
            s_values=[r.mean_cluster_size.value for r in sweep.rows],
        )
        assert 0.8 <= fit.exponent_estimate <= 1.2

    def test_nu_band(self, sweep):
        fit = analysis.estimate_nu(
            0.25, g_tables={r.p: (r.g_r, r.g_hat) for r in sweep.rows}
        )
        assert 0.8 <= fit.exponent_estimate <= 1.2

    def test_sigma_band(self, sweep):
        fit = analysis.estimate_sigma(
            0.25,
            histograms={
                r.p: (r.histogram_sizes, r.histogram_counts) for r in sweep.rows
            },
        )
        assert 0.8 <= fit.exponent_estimate <= 1.2


class TestComparisonReport:
    def test_additive_all_agree(self):
        params = ModelParams(p=0.3, p_e=0.2)
        sweep = mc.run_sweep(
            [(0.3, 0.2)], "paper_additive", 200_000, 10, master_seed=42, r_max=10
        )
        report = analysis.compare_analytic_mc(sweep, params)
        assert all(row.agrees for row in report.rows)
        observables = {row.observable for row in report.rows}
        assert "mean_cluster_size_restricted" in observables
        assert "pair_connectivity_r10" in observables
        assert "spanning_probability" in observables

    def test_overlap_g_rows_disagree(self):
        params = ModelParams(p=0.3, p_e=0.2)
        sweep = mc.run_sweep(
            [(0.3, 0.2)], "independent_overlap", 200_000, 10, master_seed=42, r_max=10
        )
        report = analysis.compare_analytic_mc(sweep, params)
        g_rows = [r for r in report.rows if r.observable.startswith("pair_connectivity")]
        assert g_rows and all(not row.agrees for row in g_rows)

    def test_ledger_entries_always_present(self):
        params = ModelParams(p=0.3, p_e=0.2)
        sweep = mc.run_sweep([(0.3, 0.2)], "paper_additive", 1000, 3, master_seed=1)
        report = analysis.compare_analytic_mc(sweep, params)
        names = [d.name for d in report.discrepancies]
        assert names == [
            "delayed_release_jump",
            "pre_transition_abscissa",
            "cluster_sum_lower_limit",
        ]
        assert "0.5185" in report.discrepancies[0].evaluated

    def test_agreement_flags_recomputable(self):
        params = ModelParams(p=0.3, p_e=0.2)
        sweep = mc.run_sweep([(0.3, 0.2)], "paper_additive", 50_000, 5, master_seed=11)
        report = analysis.compare_analytic_mc(sweep, params)
        for row in report.rows:
            assert row.agrees == (abs(row.analytic - row.mc) <= 4.0 * row.stderr)

    def test_missing_cell_rejected(self):
        sweep = mc.run_sweep([(0.3, 0.2)], "paper_additive", 1000, 3, master_seed=1)
        with pytest.raises(DomainError):
            analysis.compare_analytic_mc(sweep, ModelParams(p=0.4, p_e=0.2))
