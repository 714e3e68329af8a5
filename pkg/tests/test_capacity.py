import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartreelab.capacity import (
    CutoffSpec,
    RegimeLabel,
    capacity_functional,
    classify_regime,
    coupled_criterion_values,
    cutoff_derivative,
    cutoff_profile,
    fit_loglog_slope,
    frac_lap_scaling_check,
    fractional_chain_rule_margin,
    laplacian_cost_integral,
    make_test_function,
    mass_nonexistence_criterion,
    power_cutoff_comparison,
    tail_nonexistence_criterion,
    time_derivative_cost_integral,
)
from hartreelab.grids import make_grid
from hartreelab.operators import ConstantKernel, RieszKernel
from hartreelab.solver import CustomData, GaussianData, ProblemSpec, RunOutcome, integrate


class TestCutoffProfile:
    def test_plateau_and_support(self):
        assert cutoff_profile(0.0) == 1.0
        assert cutoff_profile(0.5) == 1.0
        assert cutoff_profile(1.0) == 0.0
        assert cutoff_profile(2.0) == 0.0

    def test_indicator_bounds_and_monotonicity(self):
        r = np.linspace(0.0, 1.5, 4001)
        phi = cutoff_profile(r)
        assert np.all(phi >= 0.0) and np.all(phi <= 1.0)
        assert np.all(np.diff(phi) <= 1e-15)
        assert np.all(phi[r <= 0.5] == 1.0)
        assert np.all(phi[r >= 1.0] == 0.0)

    def test_derivative_consistent(self):
        r = np.linspace(0.05, 1.4, 801)
        fd = (cutoff_profile(r + 1e-6) - cutoff_profile(r - 1e-6)) / 2e-6
        assert np.abs(fd - cutoff_derivative(r)).max() <= 1e-9

    @settings(max_examples=50, deadline=None)
    @given(r=st.floats(min_value=0.0, max_value=5.0))
    def test_profile_in_unit_interval(self, r):
        val = float(cutoff_profile(r))
        assert 0.0 <= val <= 1.0


class TestCutoffSpec:
    def test_exponent_formula(self):
        assert CutoffSpec(2.0, 1.0).exponent == pytest.approx(4.0)  # p+q = 3
        assert CutoffSpec(3.0, 1.0).exponent == pytest.approx(3.0)  # p+q = 4

    def test_exponent_exceeds_two(self):
        for total in (2.1, 3.0, 5.0, 9.0):
            assert CutoffSpec(total - 1.0, 1.0).exponent > 2.0

    def test_rejects_subcritical_sum(self):
        with pytest.raises(ValueError):
            CutoffSpec(1.0, 1.0)

    def test_synthetic_exponent(self):
        assert CutoffSpec(1.0, 1.0, exponent=1.0).exponent == 1.0


class TestTestFunction:
    def test_plateau_value(self):
        psi = make_test_function(CutoffSpec(2.0, 1.0), R=4.0, T=10.0)
        assert psi(0.0, 0.0) == 1.0
        assert psi(2.0, 1.0) == 1.0  # inside both plateaus

    def test_vanishes_at_horizon(self):
        psi = make_test_function(CutoffSpec(2.0, 1.0), R=4.0, T=10.0)
        x = np.linspace(-6, 6, 13)
        assert np.all(psi(10.0, x) == 0.0)

    def test_vanishes_outside_ball(self):
        psi = make_test_function(CutoffSpec(2.0, 1.0), R=4.0, T=10.0)
        assert psi(0.0, 4.5) == 0.0

    def test_sandwiched_between_indicators(self):
        psi = make_test_function(CutoffSpec(2.0, 1.0), R=2.0, T=5.0)
        t = np.linspace(0, 5, 21)[:, None]
        x = np.linspace(-2.5, 2.5, 41)[None, :]
        vals = psi(t, x)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


class TestRescalingIdentity:
    def test_identity_at_unit_scale(self):
        assert frac_lap_scaling_check(CutoffSpec(2.0, 1.0), 0.5, 1.0) <= 1e-12

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("R", [2.0, 8.0])
    def test_quadrature_budget(self, s, R):
        assert frac_lap_scaling_check(CutoffSpec(2.0, 1.0), s, R) <= 1e-6

    def test_classical_case_exact(self):
        assert frac_lap_scaling_check(CutoffSpec(2.0, 1.0), 1.0, 4.0) <= 1e-10


class TestPowerCutoffComparison:
    def test_margin_nonnegative(self):
        cut = CutoffSpec(2.0, 1.0)
        for beta in (0.5, 1.0, 1.5):
            assert fractional_chain_rule_margin(cut, beta) >= -1e-8

    def test_plateau_point_signs(self):
        cut = CutoffSpec(2.0, 1.0)
        lhs, rhs = power_cutoff_comparison(cut, 1.0, 1.0, np.array([0.0]))
        # the plateau is the global maximum, so the operator is positive
        # there on both sides, and the composite side is the smaller one
        assert lhs[0] >= 0.0
        assert rhs[0] - lhs[0] >= 0.0

    def test_outside_support(self):
        cut = CutoffSpec(2.0, 1.0)
        lhs, rhs = power_cutoff_comparison(cut, 1.0, 1.0, np.array([2.2]))
        assert lhs[0] < 0.0
        assert rhs[0] == 0.0
        assert rhs[0] - lhs[0] >= -1e-8

    def test_unit_exponent_is_equality(self):
        syn = CutoffSpec(2.0, 1.0, exponent=1.0)
        lhs, rhs = power_cutoff_comparison(syn, 1.0, 1.0, np.linspace(0, 2.5, 21))
        assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(lhs).max()

    def test_requires_fractional_order(self):
        with pytest.raises(ValueError):
            fractional_chain_rule_margin(CutoffSpec(2.0, 1.0), 2.0)


class TestCostIntegrals:
    R_GRID = np.geomspace(1.0, 100.0, 9)
    T_GRID = np.geomspace(1.0, 100.0, 9)

    def test_laplacian_cost_slopes(self):
        n, p, q, beta = 1, 2.0, 1.0, 2.0  # p+q = 3
        slope_r = fit_loglog_slope(
            self.R_GRID,
            [laplacian_cost_integral(n, beta, p, q, R, 10.0) for R in self.R_GRID],
        )
        slope_t = fit_loglog_slope(
            self.T_GRID,
            [laplacian_cost_integral(n, beta, p, q, 10.0, T) for T in self.T_GRID],
        )
        assert slope_r == pytest.approx(1.0 / 3.0 - beta, rel=0.05)
        assert slope_t == pytest.approx(1.0 / 3.0, rel=0.05)

    def test_laplacian_cost_slopes_fractional_order(self):
        slope_r = fit_loglog_slope(
            self.R_GRID,
            [laplacian_cost_integral(1, 1.5, 2.0, 1.0, R, 10.0) for R in self.R_GRID],
        )
        assert slope_r == pytest.approx(1.0 / 3.0 - 1.5, rel=0.05)

    def test_time_cost_slopes(self):
        n, p, q = 1, 2.0, 1.0
        slope_r = fit_loglog_slope(
            self.R_GRID,
            [time_derivative_cost_integral(n, 2.0, p, q, R, 10.0) for R in self.R_GRID],
        )
        slope_t = fit_loglog_slope(
            self.T_GRID,
            [time_derivative_cost_integral(n, 2.0, p, q, 10.0, T) for T in self.T_GRID],
        )
        assert slope_r == pytest.approx(1.0 / 3.0, rel=0.05)
        assert slope_t == pytest.approx(-2.0 / 3.0, rel=0.05)

    def test_slopes_robust_to_profile_convention(self):
        # widen the plateau: values change by a bounded factor, slopes do not
        wide = lambda r: cutoff_profile(np.maximum(0.0, 2.0 * np.asarray(r) - 1.0))
        vals_std = [laplacian_cost_integral(1, 2.0, 2.0, 1.0, R, 10.0) for R in self.R_GRID]
        vals_wide = [
            laplacian_cost_integral(1, 2.0, 2.0, 1.0, R, 10.0, profile=wide)
            for R in self.R_GRID
        ]
        slope_std = fit_loglog_slope(self.R_GRID, vals_std)
        slope_wide = fit_loglog_slope(self.R_GRID, vals_wide)
        assert slope_wide == pytest.approx(slope_std, rel=0.05)
        factors = np.asarray(vals_wide) / np.asarray(vals_std)
        assert factors.max() / factors.min() <= 1.6

        t_std = [time_derivative_cost_integral(1, 2.0, 2.0, 1.0, 10.0, T) for T in self.T_GRID]
        t_wide = [
            time_derivative_cost_integral(1, 2.0, 2.0, 1.0, 10.0, T, profile=wide)
            for T in self.T_GRID
        ]
        assert fit_loglog_slope(self.T_GRID, t_wide) == pytest.approx(
            fit_loglog_slope(self.T_GRID, t_std), rel=0.05
        )

    def test_values_nonnegative(self):
        assert laplacian_cost_integral(1, 2.0, 2.0, 1.0, 4.0, 4.0) >= 0.0
        assert time_derivative_cost_integral(1, 2.0, 2.0, 1.0, 4.0, 4.0) >= 0.0

    def test_2d_time_cost(self):
        slope_r = fit_loglog_slope(
            self.R_GRID,
            [time_derivative_cost_integral(2, 2.0, 2.0, 1.0, R, 10.0) for R in self.R_GRID],
        )
        assert slope_r == pytest.approx(2.0 / 3.0, rel=0.05)  # n(p+q-2)/(p+q) with n=2

    def test_2d_fractional_laplacian_cost_unsupported(self):
        with pytest.raises(NotImplementedError):
            laplacian_cost_integral(2, 1.5, 2.0, 1.0, 4.0, 4.0)


class TestCriteria:
    R_GRID = np.geomspace(1.0, 1e5, 26)

    def test_riesz_divergent_instance(self):
        # exponent -n(p+q-1) + alpha + beta = -1.5 + 0.5 + 2 = +1
        got = mass_nonexistence_criterion(RieszKernel(0.5, 1), 1, 2.0, 1.5, 1.0, self.R_GRID)
        assert got == "diverges"

    def test_riesz_bounded_instance(self):
        # exponent -3 + 0.5 + 2 = -0.5
        got = mass_nonexistence_criterion(RieszKernel(0.5, 1), 1, 2.0, 3.0, 1.0, self.R_GRID)
        assert got == "bounded"

    def test_tail_vanishing_instance(self):
        # gamma(p+q-1) - alpha - beta = 0.4*6 - 2.5 = -0.1
        got = tail_nonexistence_criterion(
            RieszKernel(0.5, 1), 1, 2.0, 6.0, 1.0, 0.4, self.R_GRID
        )
        assert got == "vanishes"

    def test_tail_boundary_inconclusive(self):
        gamma = 2.5 / 6.0  # gamma(p+q-1) = alpha + beta exactly
        got = tail_nonexistence_criterion(
            RieszKernel(0.5, 1), 1, 2.0, 6.0, 1.0, gamma, self.R_GRID
        )
        assert got == "inconclusive"

    def test_requires_supercritical_sum(self):
        with pytest.raises(ValueError):
            mass_nonexistence_criterion(RieszKernel(0.5, 1), 1, 2.0, 1.0, 1.0, self.R_GRID)

    def test_requires_four_decades(self):
        with pytest.raises(ValueError):
            mass_nonexistence_criterion(
                RieszKernel(0.5, 1), 1, 2.0, 1.5, 1.0, np.geomspace(1, 100, 5)
            )

    def test_hundred_point_sign_agreement(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 100:
            alpha = rng.uniform(0.1, 0.9)
            beta = rng.uniform(0.3, 2.0)
            total = rng.uniform(2.05, 7.0)
            exponent = -(total - 1.0) + alpha + beta
            if abs(exponent) < 0.06:
                continue  # inside the documented dead band
            got = mass_nonexistence_criterion(
                RieszKernel(alpha, 1), 1, beta, total - 1.0, 1.0, self.R_GRID
            )
            assert got == ("diverges" if exponent > 0 else "bounded")
            checked += 1

    def test_power_log_kernel_criterion(self):
        from hartreelab.operators import PowerLogKernel

        kernel = PowerLogKernel(0.5, -0.3, 1)
        # K(R) ~ R^(-0.5) log^(-0.3): power part decides: -0.5 - 1*(p+q-2) + beta
        got = mass_nonexistence_criterion(kernel, 1, 2.0, 1.5, 1.0, self.R_GRID)
        assert got == "diverges"  # -0.5 - 0.5 + 2 = +1 (log factor subdominant)

    def test_coupled_criterion_matches_power_law(self):
        T = np.geomspace(1.0, 1e6, 13)
        vals = coupled_criterion_values(RieszKernel(0.5, 1), 1, 2.0, 1.5, 1.0, T)
        slope = fit_loglog_slope(T, vals)
        # K(2 T^(1/2)) T^((2 - 1)/2): exponent (alpha - n)/beta + 1 - n(p+q-2)/beta
        assert slope == pytest.approx((0.5 - 1.0) / 2.0 + (2.0 - 0.5) / 2.0, rel=1e-6)


class TestClassifier:
    def test_threshold_values(self):
        cls = classify_regime(1, 0.5, 2.0, 1.5, 1.0)
        assert cls.p_blowup == pytest.approx(3.5)
        assert cls.p_global == pytest.approx(6.0)

    def test_mass_nonexistence_example(self):
        assert classify_regime(1, 0.5, 2.0, 1.5, 1.0).label is RegimeLabel.NONEXISTENCE_MASS

    def test_open_band_example(self):
        assert classify_regime(1, 0.5, 2.0, 3.0, 1.5).label is RegimeLabel.OPEN_GAP

    def test_global_small_data(self):
        assert classify_regime(1, 0.5, 2.0, 5.5, 1.0).label is RegimeLabel.GLOBAL_SMALL_DATA

    def test_tail_label_keeps_gamma(self):
        cls = classify_regime(1, 0.5, 2.0, 4.0, 3.0, gamma=0.3)
        assert cls.label is RegimeLabel.NONEXISTENCE_TAIL
        assert cls.gamma == 0.3

    def test_admissible_exponents_always_classified(self):
        # with p > 1 and q >= 1 the three theorem ranges plus the open band
        # tile the parameter space; the fallback label is reserved for
        # kernels outside the closed-form family
        rng = np.random.default_rng(3)
        for _ in range(50):
            cls = classify_regime(
                1,
                rng.uniform(0.05, 0.95),
                rng.uniform(0.1, 2.0),
                rng.uniform(1.01, 6.0),
                rng.uniform(1.0, 4.0),
            )
            assert cls.label is not RegimeLabel.OUTSIDE_HYPOTHESES

    def test_parameter_domains(self):
        with pytest.raises(ValueError):
            classify_regime(1, 1.0, 2.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            classify_regime(1, 0.5, 2.5, 2.0, 1.0)
        with pytest.raises(ValueError):
            classify_regime(1, 0.5, 2.0, 0.9, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(
        alpha=st.floats(min_value=0.05, max_value=0.95),
        beta=st.floats(min_value=0.1, max_value=2.0),
        p=st.floats(min_value=1.01, max_value=6.0),
        q=st.floats(min_value=1.0, max_value=4.0),
    )
    def test_threshold_ordering_and_scaling_equivalence(self, alpha, beta, p, q):
        cls = classify_regime(1, alpha, beta, p, q)
        assert cls.p_global > cls.p_blowup  # strict whenever alpha > 0
        assert (cls.q_scaling > 1.0) == (p + q > cls.p_scaling)

    @settings(max_examples=100, deadline=None)
    @given(
        alpha=st.floats(min_value=0.05, max_value=0.95),
        beta=st.floats(min_value=0.1, max_value=2.0),
        total=st.floats(min_value=2.01, max_value=9.0),
        gamma=st.one_of(st.none(), st.floats(min_value=0.05, max_value=3.0)),
    )
    def test_nonexistence_and_global_disjoint(self, alpha, beta, total, gamma):
        cls = classify_regime(1, alpha, beta, total - 1.0, 1.0, gamma)
        if cls.label is RegimeLabel.NONEXISTENCE_MASS:
            assert total < cls.p_global
        if cls.label is RegimeLabel.GLOBAL_SMALL_DATA:
            assert total > cls.p_blowup


class TestCapacityFunctional:
    def _constant_outcome(self, grid, value, T, points=33):
        times = np.linspace(0.0, T, points)
        fields = [(float(t), np.full(grid.shape, value)) for t in times]
        return RunOutcome("completed", None, [], 0, {}, fields=fields)

    def test_zero_solution(self):
        g = make_grid(1, 256, 16.0)
        spec = ProblemSpec(
            grid=g,
            beta=2.0,
            kernel=ConstantKernel(0.7),
            p=2.0,
            q=1.0,
            initial=GaussianData(0.0, 1.0),
            horizon=4.0,
        )
        rep = capacity_functional(spec, self._constant_outcome(g, 0.0, 4.0), 8.0, 4.0)
        assert rep.nonlinear_integral == 0.0
        assert rep.lower_bound == 0.0
        assert np.isnan(rep.ratio)

    def test_constant_solution_matches_quadrature_oracle(self):
        from scipy.integrate import quad

        g = make_grid(1, 512, 16.0)
        R, T, c = 8.0, 4.0, 1.3
        spec = ProblemSpec(
            grid=g,
            beta=2.0,
            kernel=ConstantKernel(0.7),
            p=2.0,
            q=1.0,
            initial=CustomData.from_array(np.full(g.shape, c)),
            horizon=T,
        )
        rep = capacity_functional(spec, self._constant_outcome(g, c, T), R, T)
        # with constant data the slice bound is Cauchy-Schwarz-tight and the
        # remaining slack is the cutoff taper, computable in closed form:
        # ratio = box / (2R * int_0^1 profile^(2 ell))
        ell = CutoffSpec(2.0, 1.0).exponent
        c2l = quad(lambda r: cutoff_profile(r) ** (2 * ell), 0.0, 1.0)[0]
        expected = g.box_length / (2.0 * R * c2l)
        assert rep.ratio == pytest.approx(expected, rel=1e-3)
        assert rep.ratio >= 1.0 - 0.05

    def test_blowup_window_satisfies_lower_bound(self):
        g = make_grid(1, 1024, 64.0)
        spec = ProblemSpec(
            grid=g,
            beta=2.0,
            kernel=RieszKernel(0.5, 1),
            p=1.5,
            q=1.0,
            initial=GaussianData(5.0, 1.0),
            horizon=0.03,
            dt_initial=1e-4,
            dt_min=1e-15,
            lebesgue_index=3.0,
        )
        out = integrate(spec, record_fields_at=list(np.linspace(0.0, 0.03, 25)))
        rep = capacity_functional(spec, out, R=16.0, T=0.03)
        assert rep.ratio >= 1.0 - 0.05

    def test_support_violation_rejected(self):
        g = make_grid(1, 256, 16.0)
        spec = ProblemSpec(
            grid=g,
            beta=2.0,
            kernel=ConstantKernel(1.0),
            p=2.0,
            q=1.0,
            initial=GaussianData(1.0, 1.0),
            horizon=1.0,
        )
        with pytest.raises(ValueError, match="support"):
            capacity_functional(spec, self._constant_outcome(g, 1.0, 1.0), 10.0, 1.0)

    def test_missing_fields_rejected(self):
        g = make_grid(1, 256, 16.0)
        spec = ProblemSpec(
            grid=g,
            beta=2.0,
            kernel=ConstantKernel(1.0),
            p=2.0,
            q=1.0,
            initial=GaussianData(1.0, 1.0),
            horizon=1.0,
        )
        outcome = RunOutcome("completed", None, [], 0, {})
        with pytest.raises(ValueError, match="fields"):
            capacity_functional(spec, outcome, 4.0, 1.0)


class TestReportBuilder:
    def test_assembles_slopes_criterion_and_regime(self):
        from hartreelab.capacity import build_capacity_report
        from hartreelab.operators import RieszKernel as RK

        rep = build_capacity_report(RK(0.5, 1), n=1, beta=2.0, p=2.0, q=1.0)
        assert rep.laplacian_cost > 0 and rep.time_cost > 0
        assert rep.laplacian_cost_slopes[0] == pytest.approx(-5.0 / 3.0, rel=0.05)
        assert rep.time_cost_slopes[1] == pytest.approx(-2.0 / 3.0, rel=0.05)
        assert rep.regime.label is RegimeLabel.NONEXISTENCE_MASS
        assert len(rep.criterion_values) == len(rep.criterion_radii)
