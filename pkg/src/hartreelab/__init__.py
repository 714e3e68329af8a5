"""Pseudo-spectral laboratory for the fractional heat equation driven by a
convolution (Hartree-type) nonlinearity: u_t + (-Lap)^(beta/2) u = (K*|u|^p)|u|^q.

The package provides the periodic spectral core, the nonlocal operators
(fractional Laplacian, Riesz potential, kernel convolutions), the linear
propagator with its smoothing estimates, an exponential time integrator with
blow-up detection, and the nonexistence/global-existence exponent machinery.
"""

__version__ = "0.1.0"

from .capacity import (
    CapacityReport,
    CutoffSpec,
    RegimeClassification,
    RegimeLabel,
    build_capacity_report,
    capacity_functional,
    classify_regime,
    cutoff_profile,
    frac_lap_scaling_check,
    fractional_chain_rule_margin,
    laplacian_cost_integral,
    make_test_function,
    mass_nonexistence_criterion,
    tail_nonexistence_criterion,
    time_derivative_cost_integral,
)
from .grids import (
    Field,
    Grid,
    Multiplier,
    SpectralField,
    apply_multiplier,
    constant_field,
    dealias,
    field_from_function,
    forward_transform,
    inverse_transform,
    lp_norm,
    make_grid,
    mass,
    radial_multiplier,
)
from .operators import (
    ConstantKernel,
    PowerKernel,
    PowerLogKernel,
    RieszConstant,
    RieszKernel,
    fractional_laplacian_quadrature,
    fractional_laplacian_spectral,
    hartree_rhs,
    hls_ratio,
    kernel_convolution,
    riesz_constant,
    riesz_potential,
    tail_hypothesis_gap,
)
from .semigroup import (
    PropagatorSpec,
    heat_kernel_values,
    propagate,
    self_similarity_check,
    verify_lp_lq,
)
from .solver import (
    AlgebraicData,
    CustomData,
    GaussianData,
    PicardResult,
    ProblemSpec,
    RunOutcome,
    etd_step,
    integrate,
    picard_local_solve,
    scaling_check,
)

__all__ = [
    "__version__",
    "AlgebraicData",
    "CapacityReport",
    "ConstantKernel",
    "CustomData",
    "CutoffSpec",
    "Field",
    "GaussianData",
    "Grid",
    "Multiplier",
    "PicardResult",
    "PowerKernel",
    "PowerLogKernel",
    "ProblemSpec",
    "PropagatorSpec",
    "RegimeClassification",
    "RegimeLabel",
    "RieszConstant",
    "RieszKernel",
    "RunOutcome",
    "SpectralField",
    "apply_multiplier",
    "build_capacity_report",
    "capacity_functional",
    "classify_regime",
    "constant_field",
    "cutoff_profile",
    "dealias",
    "etd_step",
    "field_from_function",
    "forward_transform",
    "frac_lap_scaling_check",
    "fractional_chain_rule_margin",
    "fractional_laplacian_quadrature",
    "fractional_laplacian_spectral",
    "hartree_rhs",
    "heat_kernel_values",
    "hls_ratio",
    "integrate",
    "inverse_transform",
    "kernel_convolution",
    "laplacian_cost_integral",
    "lp_norm",
    "make_grid",
    "make_test_function",
    "mass",
    "mass_nonexistence_criterion",
    "picard_local_solve",
    "propagate",
    "radial_multiplier",
    "riesz_constant",
    "riesz_potential",
    "scaling_check",
    "self_similarity_check",
    "tail_hypothesis_gap",
    "tail_nonexistence_criterion",
    "time_derivative_cost_integral",
    "verify_lp_lq",
]
