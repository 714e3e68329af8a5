import numpy as np
import pytest

from hartreelab.grids import Field, field_from_function, lp_norm, make_grid, mass
from hartreelab.semigroup import (
    PropagatorSpec,
    heat_kernel_values,
    propagate,
    self_similarity_check,
    verify_lp_lq,
)


def smooth_random_field(grid, rng):
    width = rng.uniform(0.5, 2.0)
    center = rng.uniform(-grid.box_length / 8, grid.box_length / 8)
    amp = rng.uniform(0.5, 2.0)
    return field_from_function(
        grid, lambda x: amp * np.exp(-((x - center) ** 2) / (2 * width**2))
    )


class TestPropagatorSpec:
    def test_domain_validation(self):
        with pytest.raises(ValueError):
            PropagatorSpec(2.5, 1.0)
        with pytest.raises(ValueError):
            PropagatorSpec(1.0, -0.1)


class TestHeatKernel:
    def test_gaussian_closed_form(self):
        g = make_grid(1, 2048, 48.0)
        k = heat_kernel_values(PropagatorSpec(2.0, 1.0), g)
        x = g.axis_coordinates
        exact = (4 * np.pi) ** -0.5 * np.exp(-(x**2) / 4.0)
        assert np.abs(k.values - exact).max() <= 1e-8

    def test_cauchy_closed_form(self):
        g = make_grid(1, 16384, 1600.0)
        k = heat_kernel_values(PropagatorSpec(1.0, 1.0), g)
        x = g.axis_coordinates
        exact = 1.0 / (np.pi * (1.0 + x**2))
        window = np.abs(x) <= g.box_length / 4
        assert np.abs(k.values - exact)[window].max() <= 1e-6

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5, 2.0])
    def test_unit_mass(self, beta):
        g = make_grid(1, 16384, 80.0)
        k = heat_kernel_values(PropagatorSpec(beta, 1.0), g)
        assert abs(mass(k) - 1.0) <= 1e-8

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5, 2.0])
    def test_positivity(self, beta):
        g = make_grid(1, 16384, 80.0)
        k = heat_kernel_values(PropagatorSpec(beta, 1.0), g)
        assert k.values.min() >= -1e-9 * k.values.max()

    def test_delta_time_rejected(self):
        g = make_grid(1, 64, 8.0)
        with pytest.raises(ValueError):
            heat_kernel_values(PropagatorSpec(2.0, 0.0), g)


class TestPropagate:
    def test_identity_at_zero_time(self):
        g = make_grid(1, 256, 32.0)
        f = field_from_function(g, lambda x: np.exp(-(x**2)))
        out = propagate(f, PropagatorSpec(1.5, 0.0))
        assert np.array_equal(out.values, f.values)

    def test_one_parameter_law(self):
        g = make_grid(1, 512, 48.0)
        f = field_from_function(g, lambda x: np.exp(-(x**2)))
        two_steps = propagate(
            propagate(f, PropagatorSpec(1.5, 0.4)), PropagatorSpec(1.5, 0.6)
        )
        one_step = propagate(f, PropagatorSpec(1.5, 1.0))
        assert np.abs(two_steps.values - one_step.values).max() <= (
            1e-12 * np.abs(one_step.values).max()
        )

    def test_norm_contraction_random_fields(self):
        g = make_grid(1, 1024, 64.0)
        rng = np.random.default_rng(11)
        for _ in range(50):
            f = smooth_random_field(g, rng)
            beta = rng.uniform(0.5, 2.0)
            t = rng.uniform(0.05, 3.0)
            out = propagate(f, PropagatorSpec(beta, t))
            for r in (1.0, 2.0, np.inf):
                assert lp_norm(out, r) <= lp_norm(f, r) * (1.0 + 1e-8)

    def test_mass_conserved(self):
        g = make_grid(1, 512, 48.0)
        f = field_from_function(g, lambda x: np.exp(-(x**2)) + 0.3 * np.exp(-((x - 2) ** 2)))
        out = propagate(f, PropagatorSpec(0.8, 2.0))
        assert abs(mass(out) - mass(f)) <= 1e-10 * abs(mass(f))


class TestSelfSimilarity:
    def test_identity_case(self):
        dev = self_similarity_check(2.0, 1.0, 1.0, make_grid(1, 1024, 48.0))
        assert dev <= 1e-12

    def test_gaussian_case(self):
        dev = self_similarity_check(2.0, 4.0, 1.0, make_grid(1, 2048, 80.0))
        assert dev <= 1e-6

    def test_fractional_case_cross_grid(self):
        dev = self_similarity_check(1.5, 2.0, 0.7, make_grid(1, 4096, 240.0))
        assert dev <= 1e-4


class TestSmoothingSlopes:
    def test_l1_to_linf_diffusive(self):
        g = make_grid(1, 4096, 400.0)
        v = field_from_function(g, lambda x: np.exp(-(x**2) / (2 * 0.25**2)))
        slope = verify_lp_lq(2.0, 1.0, np.inf, v, np.geomspace(1.0, 100.0, 9))
        assert slope == pytest.approx(-0.5, abs=0.025)

    def test_l1_to_l2_half_laplacian(self):
        g = make_grid(1, 262144, 2.0e8)
        v = field_from_function(g, lambda x: np.exp(-(x**2) / (2 * 200.0**2)))
        slope = verify_lp_lq(1.0, 1.0, 2.0, v, np.geomspace(1e4, 1e6, 7))
        assert slope == pytest.approx(-0.5, abs=0.025)

    def test_equal_exponents_no_decay(self):
        g = make_grid(1, 1024, 48.0)
        v = field_from_function(g, lambda x: np.exp(-(x**2) / 2))
        slope = verify_lp_lq(2.0, 2.0, 2.0, v, np.geomspace(1e-4, 1e-2, 7))
        assert abs(slope) <= 0.01

    def test_truncation_guard_refuses(self):
        g = make_grid(1, 256, 16.0)  # box far too small for t = 100
        v = field_from_function(g, lambda x: np.exp(-(x**2)))
        with pytest.raises(ValueError, match="box"):
            verify_lp_lq(2.0, 1.0, np.inf, v, np.geomspace(1.0, 100.0, 5))

    def test_exponent_ordering_enforced(self):
        g = make_grid(1, 256, 16.0)
        v = field_from_function(g, lambda x: np.exp(-(x**2)))
        with pytest.raises(ValueError):
            verify_lp_lq(2.0, 3.0, 2.0, v, np.geomspace(0.01, 1.0, 5))


class TestTwoDimensions:
    def test_2d_gaussian_kernel_and_mass(self):
        g = make_grid(2, 256, 40.0)
        k = heat_kernel_values(PropagatorSpec(2.0, 1.0), g)
        xx, yy = g.coordinates
        exact = (4 * np.pi) ** -1.0 * np.exp(-(xx**2 + yy**2) / 4.0)
        assert np.abs(k.values - exact).max() <= 1e-10
        assert abs(mass(k) - 1.0) <= 1e-12

    def test_2d_contraction(self):
        g = make_grid(2, 128, 32.0)
        xx, yy = g.coordinates
        f = Field(g, np.exp(-(xx**2 + yy**2)))
        out = propagate(f, PropagatorSpec(1.4, 0.7))
        assert lp_norm(out, 2.0) <= lp_norm(f, 2.0) * (1 + 1e-12)
        assert abs(mass(out) - mass(f)) <= 1e-12 * mass(f)
