"""Self-contained invariant suites behind the ``verify`` command.

Each check measures a deviation and compares it to a fixed tolerance; the
suites are small enough to run routinely but exercise every module's core
contracts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import capacity, operators, semigroup, solver
from .grids import (
    Field,
    apply_multiplier,
    constant_field,
    field_from_function,
    forward_transform,
    hermitian_deviation,
    inverse_transform,
    lp_norm,
    make_grid,
    mass,
    radial_multiplier,
)


@dataclass
class CheckResult:
    suite: str
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"[{tag}] {self.suite}.{self.name}: "
            f"measured={self.measured:.3e} tolerance={self.tolerance:.1e}"
        )


def _random_smooth_field(grid, rng, width_range=(0.5, 2.0)):
    width = rng.uniform(*width_range)
    center = rng.uniform(-grid.box_length / 8, grid.box_length / 8)
    amp = rng.uniform(0.5, 2.0)
    r2 = sum((c - center) ** 2 for c in grid.coordinates)
    return Field(grid, amp * np.exp(-r2 / (2 * width**2)))


def spectral_suite(rng: np.random.Generator) -> list[CheckResult]:
    checks: list[CheckResult] = []
    g = make_grid(1, 1024, 64.0)

    f = Field(g, rng.standard_normal(g.shape))
    back = inverse_transform(forward_transform(f))
    err = np.abs(back.values - f.values).max() / np.abs(f.values).max()
    checks.append(CheckResult("spectral", "round_trip", err, 1e-12))

    F = forward_transform(f)
    energy_phys = g.cell_volume * (f.values**2).sum()
    energy_spec = (np.abs(F.coefficients) ** 2).sum() / g.box_length**g.dim
    checks.append(
        CheckResult(
            "spectral", "parseval", abs(energy_phys - energy_spec) / energy_phys, 1e-10
        )
    )

    checks.append(CheckResult("spectral", "hermitian_symmetry", hermitian_deviation(F), 1e-12))

    m1 = radial_multiplier(g, lambda r: np.exp(-r))
    m2 = radial_multiplier(g, lambda r: 1.0 / (1.0 + r**2))
    seq = apply_multiplier(apply_multiplier(F, m1), m2)
    both = apply_multiplier(
        F, radial_multiplier(g, lambda r: np.exp(-r) / (1.0 + r**2))
    )
    comp = np.abs(seq.coefficients - both.coefficients).max() / np.abs(
        both.coefficients
    ).max()
    checks.append(CheckResult("spectral", "multiplier_composition", comp, 1e-14))

    g2 = make_grid(2, 64, 16.0)
    sym = radial_multiplier(g2, lambda r: np.exp(-(r**1.3))).symbol
    checks.append(
        CheckResult(
            "spectral",
            "radial_symbol_symmetry",
            float(np.abs(sym - sym.T).max()),
            0.0,
        )
    )

    c = constant_field(g, 3.0)
    C = forward_transform(c)
    zero_mode_err = abs(C.coefficients[0] - 3.0 * g.box_length) / (3.0 * g.box_length)
    checks.append(CheckResult("spectral", "zero_mode_is_integral", zero_mode_err, 1e-13))
    return checks


def semigroup_suite(rng: np.random.Generator) -> list[CheckResult]:
    checks: list[CheckResult] = []
    g = make_grid(1, 2048, 48.0)
    kernel = semigroup.heat_kernel_values(semigroup.PropagatorSpec(2.0, 1.0), g)
    x = g.axis_coordinates
    gauss = (4 * np.pi) ** -0.5 * np.exp(-(x**2) / 4.0)
    checks.append(
        CheckResult(
            "semigroup", "gaussian_closed_form", float(np.abs(kernel.values - gauss).max()), 1e-8
        )
    )

    worst_mass = 0.0
    worst_neg = 0.0
    gm = make_grid(1, 16384, 80.0)
    for beta in (0.5, 1.0, 1.5, 2.0):
        k = semigroup.heat_kernel_values(semigroup.PropagatorSpec(beta, 1.0), gm)
        worst_mass = max(worst_mass, abs(mass(k) - 1.0))
        worst_neg = max(worst_neg, -k.values.min() / k.values.max())
    checks.append(CheckResult("semigroup", "unit_mass", worst_mass, 1e-8))
    checks.append(CheckResult("semigroup", "kernel_positivity", worst_neg, 1e-9))

    dev = semigroup.self_similarity_check(1.5, 2.0, 0.7, make_grid(1, 4096, 240.0))
    checks.append(CheckResult("semigroup", "self_similarity", dev, 1e-4))

    f = _random_smooth_field(g, rng)
    ab = semigroup.propagate(
        semigroup.propagate(f, semigroup.PropagatorSpec(1.5, 0.3)),
        semigroup.PropagatorSpec(1.5, 0.7),
    )
    once = semigroup.propagate(f, semigroup.PropagatorSpec(1.5, 1.0))
    checks.append(
        CheckResult(
            "semigroup",
            "one_parameter_law",
            float(np.abs(ab.values - once.values).max() / np.abs(once.values).max()),
            1e-12,
        )
    )

    worst_contraction = 0.0
    worst_mass_drift = 0.0
    for _ in range(15):
        v = _random_smooth_field(g, rng)
        beta = rng.uniform(0.6, 2.0)
        out = semigroup.propagate(v, semigroup.PropagatorSpec(beta, rng.uniform(0.05, 2.0)))
        for r in (1.0, 2.0, np.inf):
            growth = lp_norm(out, r) / lp_norm(v, r) - 1.0
            worst_contraction = max(worst_contraction, growth)
        worst_mass_drift = max(worst_mass_drift, abs(mass(out) - mass(v)) / abs(mass(v)))
    checks.append(CheckResult("semigroup", "norm_contraction", worst_contraction, 1e-8))
    checks.append(CheckResult("semigroup", "mass_conservation", worst_mass_drift, 1e-10))

    gs = make_grid(1, 4096, 400.0)
    v = field_from_function(gs, lambda x: np.exp(-(x**2) / (2 * 0.25**2)))
    slope = semigroup.verify_lp_lq(2.0, 1.0, np.inf, v, np.geomspace(1.0, 100.0, 9))
    checks.append(CheckResult("semigroup", "decay_slope", abs(slope - (-0.5)), 0.025))
    return checks


def operators_suite(rng: np.random.Generator) -> list[CheckResult]:
    checks: list[CheckResult] = []

    a32 = operators.riesz_constant(3, 2.0).value
    a1h = operators.riesz_constant(1, 0.5).value
    checks.append(
        CheckResult("operators", "riesz_constant_3_2", abs(a32 - 1.0 / (4 * np.pi)), 1e-12)
    )
    checks.append(
        CheckResult(
            "operators", "riesz_constant_1_half", abs(a1h - (2 * np.pi) ** -0.5), 1e-12
        )
    )

    from scipy.special import gamma as _gamma

    g = make_grid(1, 4096, 64.0)
    f = field_from_function(g, lambda x: np.exp(-(x**2)))
    value = operators.riesz_potential(f, 0.5, "free_space_kernel").values[g.center_index()]
    exact = _gamma(0.25) / np.sqrt(2 * np.pi)
    checks.append(CheckResult("operators", "riesz_closed_form_value", abs(value - exact), 1e-4))

    gb = make_grid(1, 4096, 128.0)
    bump = field_from_function(gb, lambda x: np.exp(-(x**2) / 2.0))
    mz = operators.fractional_laplacian_spectral(bump, 2.0)
    a = operators.riesz_potential(mz, 0.5, "spectral")
    b = operators.riesz_potential(mz, 0.5, "free_space_kernel")
    agree = np.abs(a.values - b.values).max() / np.abs(b.values).max()
    checks.append(CheckResult("operators", "riesz_backend_agreement", agree, 1e-4))

    xs = np.array([0.2, 0.9, 1.7])
    pv = operators.fractional_laplacian_quadrature(np.sin, 0.5, xs, cutoff_radius=1024)
    checks.append(
        CheckResult(
            "operators",
            "pv_matches_symbol",
            float(np.abs(pv - np.sin(xs)).max() / np.abs(np.sin(xs)).max()),
            1e-4,
        )
    )
    const = operators.fractional_laplacian_quadrature(
        lambda y: np.ones_like(y), 0.5, 0.3, cutoff_radius=64
    )
    checks.append(CheckResult("operators", "pv_kills_constants", abs(const), 1e-12))

    base = None
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        fl = field_from_function(gb, lambda x: np.exp(-((lam * x) ** 2) / 2))
        ratio = operators.hls_ratio(fl, 0.5, 4.0 / 3.0, 4.0)
        base = base or ratio
        worst = max(worst, abs(ratio - base) / base)
    checks.append(CheckResult("operators", "hls_dilation_invariance", worst, 0.02))

    gap = operators.tail_hypothesis_gap(
        operators.PowerKernel(1.0, 0.5, 1), np.array([10.0, 100.0])
    )
    checks.append(CheckResult("operators", "kernel_tail_hypothesis", gap, 1e-9))

    gpos = make_grid(1, 512, 32.0)
    pos = field_from_function(gpos, lambda x: np.exp(-(x**2)))
    conv = operators.kernel_convolution(operators.PowerKernel(1.0, 0.4, 1), pos)
    checks.append(
        CheckResult("operators", "convolution_positivity", max(0.0, -conv.values.min()), 0.0)
    )
    return checks


def capacity_suite(rng: np.random.Generator) -> list[CheckResult]:
    checks: list[CheckResult] = []
    cut = capacity.CutoffSpec(2.0, 1.0)

    worst = 0.0
    for s in (0.25, 0.5, 0.75):
        for R in (1.0, 2.0, 8.0):
            worst = max(worst, capacity.frac_lap_scaling_check(cut, s, R))
    checks.append(CheckResult("capacity", "rescaling_identity", worst, 1e-6))

    margin = min(
        capacity.fractional_chain_rule_margin(cut, beta) for beta in (0.5, 1.0, 1.5)
    )
    checks.append(CheckResult("capacity", "chain_rule_margin", max(0.0, -margin), 1e-8))

    Rg = np.geomspace(1.0, 100.0, 7)
    Tg = np.geomspace(1.0, 100.0, 7)
    j1R = capacity.fit_loglog_slope(
        Rg, [capacity.laplacian_cost_integral(1, 2.0, 2.0, 1.0, R, 10.0) for R in Rg]
    )
    j1T = capacity.fit_loglog_slope(
        Tg, [capacity.laplacian_cost_integral(1, 2.0, 2.0, 1.0, 10.0, T) for T in Tg]
    )
    j2R = capacity.fit_loglog_slope(
        Rg, [capacity.time_derivative_cost_integral(1, 2.0, 2.0, 1.0, R, 10.0) for R in Rg]
    )
    j2T = capacity.fit_loglog_slope(
        Tg, [capacity.time_derivative_cost_integral(1, 2.0, 2.0, 1.0, 10.0, T) for T in Tg]
    )
    slope_err = max(
        abs(j1R - (1.0 / 3.0 - 2.0)),
        abs(j1T - 1.0 / 3.0),
        abs(j2R - 1.0 / 3.0),
        abs(j2T + 2.0 / 3.0),
    )
    checks.append(CheckResult("capacity", "cost_scaling_slopes", slope_err, 0.05 * (5.0 / 3.0)))

    mismatches = 0
    points = 0
    Rgrid = np.geomspace(1.0, 1e5, 21)
    for _ in range(40):
        alpha = rng.uniform(0.1, 0.9)
        beta = rng.uniform(0.3, 2.0)
        total = rng.uniform(2.05, 7.0)
        exponent = -1.0 * (total - 1.0) + alpha + beta
        if abs(exponent) < 0.06:
            continue
        points += 1
        got = capacity.mass_nonexistence_criterion(
            operators.RieszKernel(alpha, 1), 1, beta, total - 1.0, 1.0, Rgrid
        )
        want = "diverges" if exponent > 0 else "bounded"
        mismatches += got != want
    checks.append(CheckResult("capacity", f"criterion_signs_{points}pts", float(mismatches), 0.0))
    return checks


def solver_suite(rng: np.random.Generator) -> list[CheckResult]:
    checks: list[CheckResult] = []
    g = make_grid(1, 256, 32.0)

    spec0 = solver.ProblemSpec(
        grid=g,
        beta=2.0,
        kernel=operators.ConstantKernel(0.0),
        p=2.0,
        q=1.0,
        initial=solver.GaussianData(1.0, 1.0),
        horizon=1.0,
    )
    u0 = spec0.initial_field()
    stepped = solver.etd_step(u0, spec0, 0.01)
    lin = semigroup.propagate(u0, semigroup.PropagatorSpec(2.0, 0.01))
    checks.append(
        CheckResult(
            "solver",
            "linear_limit",
            float(np.abs(stepped.values - lin.values).max()),
            1e-12,
        )
    )

    spec = solver.ProblemSpec(
        grid=g,
        beta=2.0,
        kernel=operators.RieszKernel(0.5, 1),
        p=2.5,
        q=1.0,
        initial=solver.GaussianData(0.5, 1.0),
        horizon=0.2,
        adaptive=False,
        lebesgue_index=2.5,
    )
    sols = {}
    for mstep in (100, 200, 800):
        sp = replace(spec, dt_initial=spec.horizon / mstep)
        sols[mstep] = solver.integrate(sp, record_fields_at=[spec.horizon]).fields[-1][1]
    e1 = np.abs(sols[100] - sols[800]).max()
    e2 = np.abs(sols[200] - sols[800]).max()
    checks.append(CheckResult("solver", "second_order_ratio_err", abs(e1 / e2 - 4.0), 0.8))

    res = solver.picard_local_solve(replace(spec, dt_initial=0.05 / 1024), 0.05, max_iter=8)
    worst_ratio = max(res.ratios[1:]) if len(res.ratios) > 1 else 0.0
    checks.append(CheckResult("solver", "picard_contraction", worst_ratio, 0.5))

    out = solver.integrate(
        replace(spec, horizon=0.05, dt_initial=0.05 / 1024), record_fields_at=list(res.times)
    )
    sup = max(np.abs(u).max() for u in res.trajectory)
    gap = max(
        np.abs(uf - up).max() for (_, uf), up in zip(out.fields, res.trajectory)
    )
    checks.append(CheckResult("solver", "picard_vs_stepper", gap / sup, 1e-4))

    run = solver.integrate(
        replace(spec, horizon=0.1), record_fields_at=list(np.linspace(0.0, 0.1, 11))
    )
    drop = 0.0
    for first, second in zip(run.time_series[:-1], run.time_series[1:]):
        drop = max(drop, (first.mass - second.mass) / max(first.mass, 1e-300))
    neg = max(max(0.0, -u.min()) / np.abs(u).max() for _, u in run.fields)
    checks.append(CheckResult("solver", "mass_monotone", drop, 1e-9))
    checks.append(CheckResult("solver", "nonnegativity", neg, 1e-9))

    rerun = solver.integrate(
        replace(spec, horizon=0.1), record_fields_at=list(np.linspace(0.0, 0.1, 11))
    )
    identical = run.series_array().shape == rerun.series_array().shape and bool(
        np.all(run.series_array() == rerun.series_array())
    )
    checks.append(CheckResult("solver", "determinism", 0.0 if identical else 1.0, 0.0))

    gb = make_grid(1, 512, 64.0)
    blow = solver.ProblemSpec(
        grid=gb,
        beta=2.0,
        kernel=operators.RieszKernel(0.5, 1),
        p=1.5,
        q=1.0,
        initial=solver.GaussianData(5.0, 1.0),
        horizon=10.0,
        dt_initial=1e-3,
        dt_min=1e-15,
        lebesgue_index=3.0,
    )
    out_b = solver.integrate(blow)
    checks.append(
        CheckResult(
            "solver", "blowup_detected", 0.0 if out_b.status == "blowup" else 1.0, 0.0
        )
    )
    return checks


_SUITES = {
    "spectral": spectral_suite,
    "semigroup": semigroup_suite,
    "operators": operators_suite,
    "capacity": capacity_suite,
    "solver": solver_suite,
}


def run_suites(selector: str, seed: int = 0) -> list[CheckResult]:
    """Run one named suite or 'all'; returns every check result."""
    if selector == "all":
        names = list(_SUITES)
    elif selector in _SUITES:
        names = [selector]
    else:
        raise ValueError(
            f"unknown suite {selector!r}; choose from {', '.join(_SUITES)} or 'all'"
        )
    results: list[CheckResult] = []
    for name in names:
        rng = np.random.default_rng(seed)
        results.extend(_SUITES[name](rng))
    return results
