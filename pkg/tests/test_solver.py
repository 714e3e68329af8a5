import numpy as np
import pytest
from dataclasses import replace

from hartreelab.grids import Field, lp_norm, make_grid
from hartreelab.operators import ConstantKernel, PowerKernel, RieszKernel
from hartreelab.semigroup import PropagatorSpec, propagate
from hartreelab.solver import (
    AlgebraicData,
    CustomData,
    GaussianData,
    ProblemSpec,
    _EtdStepper,
    etd_step,
    integrate,
    picard_local_solve,
    scaling_check,
)


def riesz_spec(grid, **overrides):
    base = dict(
        grid=grid,
        beta=2.0,
        kernel=RieszKernel(0.5, 1),
        p=2.5,
        q=1.0,
        initial=GaussianData(0.5, 1.0),
        horizon=0.2,
        lebesgue_index=2.5,
    )
    base.update(overrides)
    return ProblemSpec(**base)


class TestProblemSpec:
    def test_parameter_domains(self):
        g = make_grid(1, 64, 16.0)
        with pytest.raises(ValueError):
            riesz_spec(g, beta=2.5)
        with pytest.raises(ValueError):
            riesz_spec(g, p=1.0)
        with pytest.raises(ValueError):
            riesz_spec(g, q=0.5)

    def test_q_scaling_only_for_riesz(self):
        g = make_grid(1, 64, 16.0)
        assert riesz_spec(g).q_scaling == pytest.approx(1 * (2.5 + 1 - 1) / (2.0 + 0.5))
        spec = riesz_spec(g, kernel=ConstantKernel(1.0))
        assert spec.q_scaling is None

    def test_contraction_scope(self):
        g = make_grid(1, 64, 16.0)
        ok, _ = riesz_spec(g).contraction_scope()  # p=2.5 > 2, s=2.5 in (2, 3)
        assert ok
        bad, reason = riesz_spec(g, p=1.5).contraction_scope()
        assert not bad and "outside theorem scope" in reason
        bad_s, reason_s = riesz_spec(g, lebesgue_index=5.0).contraction_scope()
        assert not bad_s and "outside theorem scope" in reason_s

    def test_initial_data_families(self):
        g = make_grid(1, 64, 16.0)
        alg = AlgebraicData(0.3, 1.2).sample(g)
        assert alg[g.center_index()] == pytest.approx(0.3)
        x = g.axis_coordinates
        assert np.allclose(alg, 0.3 * (1 + x**2) ** -0.6)
        vals = np.arange(64.0)
        assert np.array_equal(CustomData.from_array(vals).sample(g), vals)


class TestEtdStep:
    def test_zero_data_stays_zero(self):
        g = make_grid(1, 128, 32.0)
        spec = riesz_spec(g, initial=GaussianData(0.0, 1.0))
        out = etd_step(spec.initial_field(), spec, 0.01)
        assert np.all(out.values == 0.0)

    def test_linear_limit_matches_propagator(self):
        g = make_grid(1, 128, 32.0)
        spec = riesz_spec(g, kernel=ConstantKernel(0.0))
        u0 = spec.initial_field()
        stepped = etd_step(u0, spec, 0.02)
        lin = propagate(u0, PropagatorSpec(spec.beta, 0.02))
        assert np.abs(stepped.values - lin.values).max() <= 1e-12

    def test_one_step_third_order_local_defect(self):
        g = make_grid(1, 256, 32.0)
        spec = riesz_spec(g, adaptive=False)
        stepper = _EtdStepper(spec)
        u = spec.initial_field().values

        def reference(u, dt, k=64):
            w = u.copy()
            for _ in range(k):
                w = stepper.step(w, dt / k)
            return w

        defects = [
            np.abs(stepper.step(u, dt) - reference(u, dt)).max() for dt in (0.02, 0.01)
        ]
        assert defects[0] / defects[1] == pytest.approx(8.0, rel=0.25)

    def test_global_second_order(self):
        g = make_grid(1, 256, 32.0)
        spec = riesz_spec(g, adaptive=False)
        sols = {}
        for m in (100, 200, 800):
            sp = replace(spec, dt_initial=spec.horizon / m)
            sols[m] = integrate(sp, record_fields_at=[spec.horizon]).fields[-1][1]
        e1 = np.abs(sols[100] - sols[800]).max()
        e2 = np.abs(sols[200] - sols[800]).max()
        assert e1 / e2 == pytest.approx(4.0, rel=0.2)

    def test_rejects_bad_input(self):
        g = make_grid(1, 64, 16.0)
        spec = riesz_spec(g)
        with pytest.raises(ValueError):
            etd_step(spec.initial_field(), spec, 0.0)


class TestIntegrate:
    def test_zero_data_completes_with_zero_norms(self):
        g = make_grid(1, 128, 32.0)
        out = integrate(riesz_spec(g, initial=GaussianData(0.0, 1.0)))
        assert out.status == "completed"
        assert all(s.linf == 0.0 and s.mass == 0.0 for s in out.time_series)

    def test_series_strictly_increasing_and_finite(self):
        g = make_grid(1, 256, 32.0)
        out = integrate(riesz_spec(g, horizon=0.1))
        times = [s.t for s in out.time_series]
        assert all(b > a for a, b in zip(times[:-1], times[1:]))
        arr = out.series_array()
        assert np.all(np.isfinite(arr[:, :3]))

    def test_blowup_detected_with_threshold_recorded(self):
        g = make_grid(1, 512, 64.0)
        spec = riesz_spec(
            g,
            p=1.5,
            initial=GaussianData(5.0, 1.0),
            horizon=10.0,
            dt_min=1e-15,
            lebesgue_index=3.0,
        )
        out = integrate(spec)
        assert out.status == "blowup"
        assert out.blowup_time is not None and out.blowup_time < 10.0
        initial_linf = out.time_series[0].linf
        assert out.final.linf >= spec.blowup_factor * initial_linf

    def test_dt_underflow_reported_distinctly(self):
        g = make_grid(1, 256, 64.0)
        # dt_min too coarse to track the growth: must not be called blow-up
        spec = riesz_spec(
            g,
            p=1.5,
            initial=GaussianData(5.0, 1.0),
            horizon=10.0,
            dt_min=1e-6,
            lebesgue_index=3.0,
        )
        out = integrate(spec)
        assert out.status == "dt_underflow"
        assert out.blowup_time is None

    def test_blowup_time_monotone_in_amplitude(self):
        g = make_grid(1, 256, 64.0)
        times = []
        for amplitude in (3.0, 6.0, 12.0):
            spec = riesz_spec(
                g,
                p=1.5,
                initial=GaussianData(amplitude, 1.0),
                horizon=10.0,
                dt_min=1e-14,
                blowup_factor=1e4,
                lebesgue_index=3.0,
            )
            out = integrate(spec)
            assert out.status == "blowup"
            times.append(out.blowup_time)
        assert times[0] >= times[1] >= times[2]

    def test_nonnegativity_and_mass_monotonicity(self):
        g = make_grid(1, 512, 64.0)
        spec = riesz_spec(g, initial=GaussianData(1.0, 1.0), horizon=0.3)
        out = integrate(spec, record_fields_at=list(np.linspace(0.0, 0.3, 13)))
        running_sup = max(s.linf for s in out.time_series)
        for _, u in out.fields:
            assert u.min() >= -1e-9 * running_sup
        for a, b in zip(out.time_series[:-1], out.time_series[1:]):
            assert b.mass >= a.mass * (1.0 - 1e-9)

    def test_bit_reproducible(self):
        g = make_grid(1, 256, 32.0)
        spec = riesz_spec(g, horizon=0.1)
        a = integrate(spec).series_array()
        b = integrate(spec).series_array()
        assert a.shape == b.shape and np.all(a == b)

    def test_record_fields_lands_exactly(self):
        g = make_grid(1, 128, 32.0)
        out = integrate(riesz_spec(g, horizon=0.1), record_fields_at=[0.0, 0.05, 0.1])
        stored = [t for t, _ in out.fields]
        assert stored == pytest.approx([0.0, 0.05, 0.1], abs=1e-12)

    def test_config_echo_embedded(self):
        g = make_grid(1, 128, 32.0)
        out = integrate(riesz_spec(g, horizon=0.05))
        assert out.config_echo["kernel"] == "RieszKernel"
        assert out.config_echo["kernel_alpha"] == 0.5
        assert out.config_echo["p"] == 2.5


class TestPicard:
    def test_zero_data_fixed_point_first_iteration(self):
        g = make_grid(1, 128, 32.0)
        res = picard_local_solve(riesz_spec(g, initial=GaussianData(0.0, 1.0)), 0.05)
        assert res.converged
        assert res.distances[0] == 0.0

    def test_contraction_ratios_below_half(self):
        g = make_grid(1, 256, 32.0)
        res = picard_local_solve(riesz_spec(g), 0.05, max_iter=8)
        assert res.scope == "within theorem scope"
        assert not res.diverged
        assert all(r < 0.5 for r in res.ratios[1:])

    def test_matches_time_stepper(self):
        g = make_grid(1, 256, 32.0)
        spec = riesz_spec(g, adaptive=False, dt_initial=0.05 / 1024)
        res = picard_local_solve(spec, 0.05, max_iter=10)
        out = integrate(replace(spec, horizon=0.05), record_fields_at=list(res.times))
        sup = max(np.abs(u).max() for u in res.trajectory)
        gap = max(np.abs(uf - up).max() for (_, uf), up in zip(out.fields, res.trajectory))
        assert gap / sup <= 1e-4

    def test_out_of_scope_downgraded_not_raised(self):
        g = make_grid(1, 128, 32.0)
        res = picard_local_solve(riesz_spec(g, p=1.5, lebesgue_index=3.0), 0.02)
        assert "outside theorem scope" in res.scope

    def test_requires_minimum_iterations(self):
        g = make_grid(1, 128, 32.0)
        with pytest.raises(ValueError):
            picard_local_solve(riesz_spec(g), 0.05, max_iter=2)


class TestScalingCheck:
    def test_identity_at_lambda_one(self):
        g = make_grid(1, 256, 64.0)
        spec = riesz_spec(g, horizon=0.1, dt_initial=1e-3)
        assert scaling_check(spec, 1.0) == 0.0

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_equivariance(self, lam):
        g = make_grid(1, 512, 64.0)
        spec = riesz_spec(g, initial=GaussianData(1.0, 1.0), horizon=0.1, dt_initial=1e-3)
        assert scaling_check(spec, lam) <= 1e-3

    def test_critical_norm_invariance_of_rescaled_data(self):
        g = make_grid(1, 512, 64.0)
        spec = riesz_spec(g, initial=GaussianData(1.0, 1.0))
        lam = 2.0
        exponent = (spec.beta + spec.kernel.alpha) / (spec.p + spec.q - 1.0)
        rescaled_grid = make_grid(1, 512, 64.0 / lam)
        u0 = spec.initial_field()
        u_lam = Field(rescaled_grid, lam**exponent * spec.initial.sample(g))
        qsc = spec.q_scaling
        assert abs(lp_norm(u_lam, qsc) - lp_norm(u0, qsc)) <= 1e-10 * lp_norm(u0, qsc)

    def test_requires_riesz_kernel(self):
        g = make_grid(1, 128, 32.0)
        with pytest.raises(ValueError):
            scaling_check(riesz_spec(g, kernel=PowerKernel(1.0, 0.5, 1)), 2.0)


class TestPicardDivergence:
    def test_divergence_reported_not_raised(self):
        g = make_grid(1, 128, 32.0)
        spec = riesz_spec(g, initial=GaussianData(20.0, 1.0))
        with np.errstate(over="ignore", invalid="ignore"):
            res = picard_local_solve(spec, 0.5, max_iter=7, mesh_points=9)
        assert res.diverged
        assert not res.converged
