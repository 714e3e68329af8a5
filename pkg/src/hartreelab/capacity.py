"""Nonexistence machinery: rescaled cutoffs, cost integrals, exponent criteria.

The route to nonexistence integrates the equation against powers of a
smooth compactly supported cutoff rescaled in space by R and in time by T.
Everything quantitative about that argument is computable: the scaling of
the two test-function cost integrals, the kernel growth/tail criteria, and
the lower bound tying the nonlinear term to the slice integrals of a
simulated trajectory. The classifier turns the exponent conditions of the
nonexistence and small-data-global theorems into a regime label, with the
band between the two thresholds reported as genuinely open.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grids import Field
from .operators import (
    Kernel,
    RieszKernel,
    fractional_laplacian_quadrature,
    kernel_convolution,
)
from .solver import ProblemSpec, RunOutcome

_GL64_NODES, _GL64_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL48_NODES, _GL48_WEIGHTS = np.polynomial.legendre.leggauss(48)


# ---------------------------------------------------------------------------
# The smooth cutoff profile
# ---------------------------------------------------------------------------


def cutoff_profile(r) -> np.ndarray:
    """Smooth non-increasing profile: 1 on r <= 1/2, 0 on r >= 1.

    On the transition interval the profile is the standard flat-ended bump
    1/(1 + exp(1/t - 1/(1-t))) with t = 2(1-r), infinitely differentiable
    with all derivatives vanishing at both junctions.
    """
    r = np.asarray(r)
    if r.dtype.kind != "f":
        r = r.astype(float)
    t = np.clip(2.0 * (1.0 - r), 1e-9, 1.0 - 1e-9)
    gap = 1.0 / t - 1.0 / (1.0 - t)
    inner = 1.0 / (1.0 + np.exp(np.clip(gap, -700.0, 700.0)))
    return np.where(r <= 0.5, 1.0, np.where(r >= 1.0, 0.0, inner))


def cutoff_derivative(r) -> np.ndarray:
    """d/dr of the cutoff profile (nonpositive; zero outside (1/2, 1))."""
    r = np.asarray(r)
    if r.dtype.kind != "f":
        r = r.astype(float)
    t = np.clip(2.0 * (1.0 - r), 1e-9, 1.0 - 1e-9)
    gap = 1.0 / t - 1.0 / (1.0 - t)
    e = np.exp(-np.abs(np.clip(gap, -700.0, 700.0)))
    logistic = e / (1.0 + e) ** 2
    slope = (1.0 / t**2 + 1.0 / (1.0 - t) ** 2) * logistic
    return np.where((r > 0.5) & (r < 1.0), -2.0 * slope, 0.0)


def cutoff_second_derivative(r, step: float = 1e-5) -> np.ndarray:
    """d^2/dr^2 of the profile by central differencing the exact derivative."""
    r = np.asarray(r, dtype=float)
    return (cutoff_derivative(r + step) - cutoff_derivative(r - step)) / (2.0 * step)


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff profile together with the power it is raised to.

    The exponent 2(p+q-1)/(p+q-2) is the smallest power making the
    integration-by-parts bookkeeping close; it requires p+q > 2. Pass
    ``exponent`` directly only for synthetic checks.
    """

    p: float
    q: float
    exponent: float | None = None

    def __post_init__(self) -> None:
        if self.exponent is None:
            total = self.p + self.q
            if total <= 2:
                raise ValueError(f"need p+q > 2 for the cutoff power; got {total}")
            object.__setattr__(
                self, "exponent", (2.0 * total - 2.0) / (total - 2.0)
            )

    @property
    def total_power(self) -> float:
        return self.p + self.q

    def space_profile(self, x, R: float) -> np.ndarray:
        """Cutoff of |x|/R raised to the exponent."""
        return cutoff_profile(np.abs(np.asarray(x, dtype=float)) / R) ** self.exponent

    def time_profile(self, t, T: float) -> np.ndarray:
        return cutoff_profile(np.asarray(t, dtype=float) / T) ** self.exponent


def make_test_function(cut: CutoffSpec, R: float, T: float):
    """Separable space-time test function psi(t, x).

    Equals 1 on {|x| <= R/2, t <= T/2} and vanishes outside
    {|x| <= R, t <= T}. ``x`` may be an array of coordinates (1D) or a
    radius array for radial use.
    """
    if R <= 0 or T <= 0:
        raise ValueError("R and T must be positive")

    def psi(t, x):
        return cut.time_profile(t, T) * cut.space_profile(x, R)

    return psi


# ---------------------------------------------------------------------------
# Scaling identity and the power-cutoff comparison
# ---------------------------------------------------------------------------


def _profile_fractional_laplacian(s: float, x: np.ndarray, R: float, power: float = 1.0):
    """(-d^2/dx^2)^s of cutoff(|x|/R)^power; s = 1 uses the second derivative."""
    if s == 1.0:
        rho = np.abs(x) / R
        if power == 1.0:
            return -cutoff_second_derivative(rho) / R**2
        phi = cutoff_profile(rho)
        d1 = cutoff_derivative(rho)
        d2 = cutoff_second_derivative(rho)
        with np.errstate(invalid="ignore"):
            second = power * phi ** (power - 1.0) * d2 + power * (power - 1.0) * phi ** (
                power - 2.0
            ) * d1**2
        return -np.nan_to_num(second) / R**2

    def v(y):
        return cutoff_profile(np.abs(y) / R) ** power

    cutoff_radius = max(8.0 * R, 16.0)
    return fractional_laplacian_quadrature(v, s, x, cutoff_radius=cutoff_radius)


def frac_lap_scaling_check(cut: CutoffSpec, s: float, R: float, samples: int = 41) -> float:
    """Deviation of the rescaling identity for the fractional Laplacian.

    Compares the operator applied to the R-dilated cutoff against R^(-2s)
    times the operator of the unit profile at x/R, on |x| <= 2R; both sides
    are quadrature evaluations at their own scales, so the agreement is a
    genuine two-route check (exact for s = 1 where it is the chain rule).
    Returns max |lhs - rhs| / max |rhs|.
    """
    if not 0 < s <= 1:
        raise ValueError(f"s must lie in (0, 1]; got {s}")
    x = np.linspace(0.0, 2.0 * R, samples)
    lhs = _profile_fractional_laplacian(s, x, R)
    rhs = _profile_fractional_laplacian(s, x / R, 1.0) / R ** (2.0 * s)
    scale = np.abs(rhs).max()
    return float(np.abs(lhs - rhs).max() / scale)


def power_cutoff_comparison(cut: CutoffSpec, beta: float, R: float, x: np.ndarray):
    """Both sides of the composite-cutoff inequality at the sample points:
    the operator applied to cutoff^exponent, and exponent * cutoff^(exponent-1)
    times the operator of the plain cutoff."""
    if not 0 < beta < 2:
        raise ValueError(f"beta must lie in (0, 2); got {beta}")
    s = beta / 2.0
    lhs = _profile_fractional_laplacian(s, x, R, power=cut.exponent)
    plain = _profile_fractional_laplacian(s, x, R, power=1.0)
    weight = cutoff_profile(np.abs(x) / R) ** (cut.exponent - 1.0)
    rhs = cut.exponent * weight * plain
    return lhs, rhs


def fractional_chain_rule_margin(
    cut: CutoffSpec, beta: float, R: float = 1.0, samples: int = 48
) -> float:
    """Minimum of (rhs - lhs) over a 1D sample, normalized by the scale.

    The composite cutoff satisfies lhs <= rhs pointwise; the returned
    margin is negative only by quadrature error (contract: >= -1e-8).
    """
    x = np.linspace(0.0, 2.5 * R, samples)
    lhs, rhs = power_cutoff_comparison(cut, beta, R, x)
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    return float((rhs - lhs).min() / scale)


# ---------------------------------------------------------------------------
# Test-function cost integrals
# ---------------------------------------------------------------------------


def _profile_power_integral(power: float, weight=None, profile=cutoff_profile) -> float:
    """int_0^1 profile(r)^power * weight(r) dr (weight defaults to 1)."""
    lower = 0.5 * (_GL48_NODES + 1.0) * 0.5  # nodes on [0, 1/2]
    upper = lower + 0.5  # nodes on [1/2, 1]
    w = 0.25 * _GL48_WEIGHTS
    total = 0.0
    for nodes in (lower, upper):
        vals = profile(nodes) ** power
        if weight is not None:
            vals = vals * weight(nodes)
        total += float(np.sum(w * vals))
    return total


def laplacian_cost_integral(
    n: int, beta: float, p: float, q: float, R: float, T: float, profile=None
) -> float:
    """Cost of the diffusion term tested against the rescaled cutoff:
    exponent * (int_0^T cutoff_T^exp dt *
    int_{|x|<=R} cutoff_R |(-Lap)^(beta/2) cutoff_R^exp... |^m dx)^(1/m')
    with m = (p+q)/(p+q-2); scales like T^((p+q-2)/(p+q)) R^(n(p+q-2)/(p+q) - beta).

    The operator is evaluated by the principal-value quadrature for
    beta < 2 and by derivatives of the profile at beta = 2; the
    quadrature route restricts this integral to n = 1.
    """
    cut = CutoffSpec(p, q)
    total = p + q
    m = total / (total - 2.0)
    mp = (total - 2.0) / total
    prof = cutoff_profile if profile is None else profile
    d1 = cutoff_derivative if profile is None else (
        lambda r: (prof(np.asarray(r) + 5e-5) - prof(np.asarray(r) - 5e-5)) / 1e-4
    )
    d2 = cutoff_second_derivative if profile is None else (
        lambda r: (d1(np.asarray(r) + 5e-5) - d1(np.asarray(r) - 5e-5)) / 1e-4
    )

    time_factor = T * _profile_power_integral(cut.exponent, profile=prof)

    if n == 1:
        x = 0.5 * (_GL64_NODES + 1.0) * R  # nodes on [0, R]
        w = 0.5 * R * _GL64_WEIGHTS
        if beta == 2.0:
            frac = -d2(np.abs(x) / R) / R**2
        else:
            frac = fractional_laplacian_quadrature(
                lambda y: prof(np.abs(y) / R), beta / 2.0, x,
                cutoff_radius=max(8.0 * R, 16.0),
            )
        integrand = prof(x / R) * np.abs(frac) ** m
        space_factor = 2.0 * float(np.sum(w * integrand))
    elif n == 2:
        if beta != 2.0:
            raise NotImplementedError(
                "the quadrature operator is 1D; n=2 supports beta=2 only"
            )
        rho = 0.5 * (_GL64_NODES + 1.0)
        w = 0.5 * _GL64_WEIGHTS
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = -(d2(rho) + d1(rho) / rho) / R**2
        integrand = prof(rho) * np.abs(np.nan_to_num(lap)) ** m
        space_factor = 2.0 * np.pi * R**2 * float(np.sum(w * rho * integrand))
    else:
        raise ValueError("n must be 1 or 2")

    return cut.exponent * (time_factor * space_factor) ** mp


def time_derivative_cost_integral(
    n: int, beta: float, p: float, q: float, R: float, T: float, profile=None
) -> float:
    """Cost of the time-derivative term tested against the rescaled cutoff;
    scales like R^(n(p+q-2)/(p+q)) T^(-2/(p+q)) independently of beta."""
    cut = CutoffSpec(p, q)
    total = p + q
    m = total / (total - 2.0)
    mp = (total - 2.0) / total
    prof = cutoff_profile if profile is None else profile
    d1 = cutoff_derivative if profile is None else (
        lambda r: (prof(np.asarray(r) + 5e-5) - prof(np.asarray(r) - 5e-5)) / 1e-4
    )

    time_factor = T ** (1.0 - m) * _profile_power_integral(
        1.0, weight=lambda r: np.abs(d1(r)) ** m, profile=prof
    )
    if n == 1:
        space_factor = 2.0 * R * _profile_power_integral(cut.exponent, profile=prof)
    elif n == 2:
        space_factor = (
            2.0
            * np.pi
            * R**2
            * _profile_power_integral(cut.exponent, weight=lambda r: r, profile=prof)
        )
    else:
        raise ValueError("n must be 1 or 2")
    return cut.exponent * (time_factor * space_factor) ** mp


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(xs)), np.log(np.asarray(ys)), 1)[0])


# ---------------------------------------------------------------------------
# Kernel growth / tail criteria
# ---------------------------------------------------------------------------


def _slope_classification(R_grid: np.ndarray, values: np.ndarray) -> float:
    """Log-log slope over the largest decade of the radius grid."""
    R_grid = np.asarray(R_grid, dtype=float)
    top = R_grid >= R_grid.max() / 10.0
    if top.sum() < 2:
        raise ValueError("need at least two radii in the top decade")
    return fit_loglog_slope(R_grid[top], values[top])


def _validate_criterion_inputs(p: float, q: float, R_grid) -> np.ndarray:
    if p + q <= 2:
        raise ValueError("the criteria require p+q > 2")
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.max() / R_grid.min() < 1e4:
        raise ValueError("radius grid must span at least four decades")
    return R_grid


def mass_growth_values(kernel: Kernel, n: int, beta: float, p: float, q: float, R_grid):
    """K(R) * R^(-n(p+q-2)+beta) on the radius grid; its divergence as
    R -> infinity rules out global solutions for integrable data with
    positive total mass."""
    R_grid = np.asarray(R_grid, dtype=float)
    return kernel.evaluate(R_grid) * R_grid ** (-n * (p + q - 2.0) + beta)


def mass_nonexistence_criterion(
    kernel: Kernel, n: int, beta: float, p: float, q: float, R_grid
) -> str:
    """Classify the growth of the mass-condition curve: 'diverges',
    'bounded', or 'inconclusive' when the terminal log-log slope sits
    within +-0.05 (finite sampling cannot certify a limit)."""
    R_grid = _validate_criterion_inputs(p, q, R_grid)
    slope = _slope_classification(R_grid, mass_growth_values(kernel, n, beta, p, q, R_grid))
    if slope > 0.05:
        return "diverges"
    if slope < -0.05:
        return "bounded"
    return "inconclusive"


def tail_decay_values(
    kernel: Kernel, n: int, beta: float, p: float, q: float, gamma: float, R_grid
):
    """K(R)^(-1) * R^(gamma(p+q-1)-n-beta); vanishing along a sequence rules
    out global solutions for data bounded below by an algebraic tail of
    rate gamma."""
    R_grid = np.asarray(R_grid, dtype=float)
    return kernel.evaluate(R_grid) ** -1.0 * R_grid ** (gamma * (p + q - 1.0) - n - beta)


def tail_nonexistence_criterion(
    kernel: Kernel, n: int, beta: float, p: float, q: float, gamma: float, R_grid
) -> str:
    """Classify the tail-condition curve: 'vanishes', 'bounded_away', or
    'inconclusive' within the +-0.05 slope band."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    R_grid = _validate_criterion_inputs(p, q, R_grid)
    slope = _slope_classification(
        R_grid, tail_decay_values(kernel, n, beta, p, q, gamma, R_grid)
    )
    if slope < -0.05:
        return "vanishes"
    if slope > 0.05:
        return "bounded_away"
    return "inconclusive"


def coupled_criterion_values(kernel: Kernel, n: int, beta: float, p: float, q: float, T_grid):
    """The combined curve with the space radius tied to the time horizon by
    R = T^(1/beta): K(2 T^(1/beta)) * T^((beta - n(p+q-2))/beta)."""
    T_grid = np.asarray(T_grid, dtype=float)
    R = T_grid ** (1.0 / beta)
    return kernel.evaluate(2.0 * R) * T_grid ** ((beta - n * (p + q - 2.0)) / beta)


# ---------------------------------------------------------------------------
# Regime classification
# ---------------------------------------------------------------------------


class RegimeLabel(str, enum.Enum):
    NONEXISTENCE_MASS = "nonexistence_mass"
    NONEXISTENCE_TAIL = "nonexistence_tail"
    GLOBAL_SMALL_DATA = "global_small_data"
    OPEN_GAP = "open_gap"
    OUTSIDE_HYPOTHESES = "outside_hypotheses"


@dataclass(frozen=True)
class RegimeClassification:
    """Exponent thresholds and the predicted regime for the Riesz-kernel
    problem.

    ``p_blowup`` = 1 + (beta+alpha)/n: below it (with alpha+beta > n and
    positive-mass data) solutions cannot be global. ``p_global`` =
    1 + (beta+alpha)/(n-alpha): above it small data in the critical norm
    yield global solutions. The band in between is open territory.
    """

    p_blowup: float
    p_global: float
    p_scaling: float
    q_scaling: float
    label: RegimeLabel
    gamma: float | None = None


def classify_regime(
    n: int, alpha: float, beta: float, p: float, q: float, gamma: float | None = None
) -> RegimeClassification:
    """Predict the regime of (p, q) from the exponent conditions.

    Checked in order: mass-condition nonexistence (needs alpha+beta > n and
    2 < p+q below the blow-up threshold), tail-condition nonexistence
    (needs gamma in (0, alpha+beta) and 2 < p+q < 1 + (beta+alpha)/gamma),
    small-data global existence (p+q above the global threshold), the open
    band between the thresholds, and otherwise outside all hypotheses.
    """
    if not 0 < alpha < n:
        raise ValueError(f"alpha must lie in (0, n); got alpha={alpha}, n={n}")
    if not 0 < beta <= 2:
        raise ValueError(f"beta must lie in (0, 2]; got {beta}")
    if p <= 1 or q < 1:
        raise ValueError("need p > 1 and q >= 1")
    if gamma is not None and gamma <= 0:
        raise ValueError("gamma must be positive when given")

    total = p + q
    p_blowup = 1.0 + (beta + alpha) / n
    p_global = 1.0 + (beta + alpha) / (n - alpha)
    q_scaling = n * (total - 1.0) / (beta + alpha)

    if alpha + beta > n and 2.0 < total < p_blowup:
        label = RegimeLabel.NONEXISTENCE_MASS
    elif (
        gamma is not None
        and 0.0 < gamma < alpha + beta
        and 2.0 < total < 1.0 + (beta + alpha) / gamma
    ):
        label = RegimeLabel.NONEXISTENCE_TAIL
    elif total > p_global:
        label = RegimeLabel.GLOBAL_SMALL_DATA
    elif p_blowup <= total <= p_global:
        label = RegimeLabel.OPEN_GAP
    else:
        label = RegimeLabel.OUTSIDE_HYPOTHESES

    return RegimeClassification(
        p_blowup=p_blowup,
        p_global=p_global,
        p_scaling=p_blowup,
        q_scaling=q_scaling,
        label=label,
        gamma=gamma if label is RegimeLabel.NONEXISTENCE_TAIL else None,
    )


# ---------------------------------------------------------------------------
# Capacity functional on a simulated trajectory
# ---------------------------------------------------------------------------


@dataclass
class CapacityReport:
    """Bundle of capacity-method quantities.

    Slope pairs are (radius-slope, horizon-slope). For trajectory checks,
    ``nonlinear_integral`` is the tested nonlinear term,
    ``lower_bound`` the kernel-times-slice-squared bound, and ``ratio``
    their quotient (at least 1 up to quadrature error for nonnegative
    solutions supported in the window).
    """

    laplacian_cost: float | None = None
    time_cost: float | None = None
    laplacian_cost_slopes: tuple[float, float] | None = None
    time_cost_slopes: tuple[float, float] | None = None
    criterion_radii: np.ndarray | None = None
    criterion_values: np.ndarray | None = None
    regime: RegimeClassification | None = None
    nonlinear_integral: float | None = None
    lower_bound: float | None = None
    ratio: float | None = None


def capacity_functional(
    problem: ProblemSpec,
    outcome: RunOutcome,
    R: float,
    T: float,
    cut: CutoffSpec | None = None,
) -> CapacityReport:
    """Evaluate both sides of the trajectory lower bound
    int int (K*|u|^p)|u|^q psi dx dt >= K(2R) int (int u^((p+q)/2) psi dx)^2 dt.

    The trajectory must carry stored fields at quadrature times covering
    [0, T]; the test function's spatial support must sit inside the box.
    """
    if R <= 0 or T <= 0:
        raise ValueError("R and T must be positive")
    if R > problem.grid.box_length / 2.0:
        raise ValueError("test function support exceeds the grid box")
    if not outcome.fields:
        raise ValueError("the run outcome carries no stored fields")
    times = np.array([t for t, _ in outcome.fields])
    if times[0] > 1e-12 or times[-1] < T - 1e-9 * T:
        raise ValueError("stored fields must cover [0, T]")

    cut = cut or CutoffSpec(problem.p, problem.q)
    grid = problem.grid
    radius = grid.radius if grid.dim == 2 else np.abs(grid.coordinates[0])
    space_weight = cutoff_profile(radius / R) ** cut.exponent
    half_power = 0.5 * (problem.p + problem.q)

    lhs_slices = []
    slice_integrals = []
    for t, u in outcome.fields:
        time_weight = float(cut.time_profile(t, T))
        psi = time_weight * space_weight
        nonneg = np.clip(u, 0.0, None)
        conv = kernel_convolution(problem.kernel, Field(grid, np.abs(u) ** problem.p))
        lhs_slices.append(grid.cell_volume * float((conv.values * np.abs(u) ** problem.q * psi).sum()))
        slice_integrals.append(grid.cell_volume * float((nonneg**half_power * psi).sum()))

    lhs = float(np.trapezoid(lhs_slices, times))
    slice_sq = float(np.trapezoid(np.square(slice_integrals), times))
    k_at_2r = float(problem.kernel.evaluate(np.asarray([2.0 * R]))[0])
    rhs = k_at_2r * slice_sq
    ratio = lhs / rhs if rhs > 0 else float("nan")
    return CapacityReport(nonlinear_integral=lhs, lower_bound=rhs, ratio=ratio)


def build_capacity_report(
    kernel: Kernel,
    n: int,
    beta: float,
    p: float,
    q: float,
    gamma: float | None = None,
    R_grid=None,
    T_grid=None,
    R_fixed: float = 8.0,
    T_fixed: float = 8.0,
) -> CapacityReport:
    """Assemble cost values, fitted scaling slopes, the criterion curve and
    (for Riesz kernels) the regime classification into one report."""
    R_grid = np.geomspace(1.0, 1e4, 13) if R_grid is None else np.asarray(R_grid, float)
    T_grid = np.geomspace(1.0, 100.0, 9) if T_grid is None else np.asarray(T_grid, float)

    lap_R = [laplacian_cost_integral(n, beta, p, q, r, T_fixed) for r in _thin_grid(R_grid)]
    lap_T = [laplacian_cost_integral(n, beta, p, q, R_fixed, t) for t in T_grid]
    tim_R = [time_derivative_cost_integral(n, beta, p, q, r, T_fixed) for r in _thin_grid(R_grid)]
    tim_T = [time_derivative_cost_integral(n, beta, p, q, R_fixed, t) for t in T_grid]

    report = CapacityReport(
        laplacian_cost=laplacian_cost_integral(n, beta, p, q, R_fixed, T_fixed),
        time_cost=time_derivative_cost_integral(n, beta, p, q, R_fixed, T_fixed),
        laplacian_cost_slopes=(
            fit_loglog_slope(_thin_grid(R_grid), lap_R),
            fit_loglog_slope(T_grid, lap_T),
        ),
        time_cost_slopes=(
            fit_loglog_slope(_thin_grid(R_grid), tim_R),
            fit_loglog_slope(T_grid, tim_T),
        ),
        criterion_radii=R_grid,
        criterion_values=mass_growth_values(kernel, n, beta, p, q, R_grid),
    )
    if isinstance(kernel, RieszKernel):
        report.regime = classify_regime(n, kernel.alpha, beta, p, q, gamma)
    return report


def _thin_grid(R_grid: np.ndarray, max_points: int = 9) -> np.ndarray:
    """Thin a radius grid to a manageable number of regression points."""
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.size <= max_points:
        return R_grid
    idx = np.unique(np.linspace(0, R_grid.size - 1, max_points).astype(int))
    return R_grid[idx]
