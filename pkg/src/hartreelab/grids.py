"""Periodic grids, discrete Fourier transforms, and diagonal multipliers.

The box is [-L/2, L/2)^n sampled at N points per axis. The transform
normalization is chosen so that the zero-mode coefficient equals the
discrete integral of the field (spacing^n times the sample sum); with this
convention a propagator whose symbol equals 1 at frequency zero conserves
mass exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_VALID_ZERO_MODE_POLICIES = ("as_computed", "force_zero", "force_one", "override")


class SpectralSymmetryError(ValueError):
    """Raised when coefficients meant to represent a real field are not
    Hermitian-symmetric within tolerance (a corrupted spectral state)."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L/2, L/2)^n, n in {1, 2}.

    Attributes
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    points_per_axis : int
        Samples per axis; must be a power of two (FFT contract).
    box_length : float
        Side length L of the periodic box.
    """

    dim: int
    points_per_axis: int
    box_length: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_axis
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 4, got {n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def num_points(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def axis_coordinates(self) -> np.ndarray:
        """Sample locations along one axis: x_j = -L/2 + j*h."""
        return -0.5 * self.box_length + self.spacing * np.arange(self.points_per_axis)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Meshgrid ('ij') coordinate arrays, one per axis."""
        axes = (self.axis_coordinates,) * self.dim
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        """|x| on the grid."""
        return np.sqrt(sum(c**2 for c in self.coordinates))

    @cached_property
    def axis_frequencies(self) -> np.ndarray:
        """Frequency lattice along one axis in FFT order: xi_k = 2*pi*k/L."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, ...]:
        axes = (self.axis_frequencies,) * self.dim
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def frequency_radius(self) -> np.ndarray:
        """|xi| on the frequency lattice."""
        return np.sqrt(sum(k**2 for k in self.frequencies))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: True for retained modes."""
        cut = (2.0 / 3.0) * np.abs(self.axis_frequencies).max()
        keep = np.ones(self.shape, dtype=bool)
        for k in self.frequencies:
            keep &= np.abs(k) <= cut
        return keep

    def center_index(self) -> tuple[int, ...]:
        """Index of the point x = 0."""
        return (self.points_per_axis // 2,) * self.dim


def make_grid(dim: int, points_per_axis: int, box_length: float) -> Grid:
    """Construct a periodic grid; rejects non-power-of-two resolutions."""
    return Grid(dim=dim, points_per_axis=points_per_axis, box_length=float(box_length))


@dataclass
class Field:
    """Real-valued samples of a function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass
class SpectralField:
    """Fourier coefficients on the frequency lattice of a grid."""

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != self.grid.shape:
            raise ValueError(
                f"coefficients shape {self.coefficients.shape} does not match grid "
                f"{self.grid.shape}"
            )


@dataclass(frozen=True)
class Multiplier:
    """Diagonal Fourier multiplier: a real symbol over the frequency lattice.

    ``zero_mode_policy`` controls how the frequency-zero entry is applied:
    ``as_computed`` uses the symbol value, ``force_zero`` annihilates the
    mode, ``force_one`` passes it through unchanged, and ``override`` uses
    ``zero_mode_value`` instead of the symbol.
    """

    grid: Grid
    symbol: np.ndarray
    zero_mode_policy: str = "as_computed"
    zero_mode_value: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbol", np.asarray(self.symbol, dtype=float))
        if self.symbol.shape != self.grid.shape:
            raise ValueError("symbol shape does not match grid")
        if self.zero_mode_policy not in _VALID_ZERO_MODE_POLICIES:
            raise ValueError(f"unknown zero_mode_policy {self.zero_mode_policy!r}")
        if self.zero_mode_policy == "override" and self.zero_mode_value is None:
            raise ValueError("zero_mode_policy='override' requires zero_mode_value")


def radial_multiplier(
    grid: Grid,
    symbol_of_radius,
    zero_mode_policy: str = "as_computed",
    zero_mode_value: float | None = None,
) -> Multiplier:
    """Build a multiplier from a radial symbol m(|xi|).

    The symbol is evaluated on |xi|, so lattice points with equal |xi|
    receive identical values by construction. For symbols singular at the
    origin pass a zero-mode policy; the origin entry is evaluated last and
    replaced before use.
    """
    r = grid.frequency_radius
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = np.asarray(symbol_of_radius(r), dtype=float)
    origin = (0,) * grid.dim
    if not np.isfinite(sym[origin]):
        sym[origin] = 0.0  # placeholder; the policy decides what happens here
    return Multiplier(grid, sym, zero_mode_policy, zero_mode_value)


def forward_transform(f: Field) -> SpectralField:
    """Discrete Fourier transform with the zero-mode-equals-integral convention."""
    if not f.is_finite():
        raise ValueError("cannot transform a field with non-finite values")
    coeffs = np.fft.fftn(f.values) * f.grid.cell_volume
    return SpectralField(f.grid, coeffs)


def inverse_transform(F: SpectralField, imag_tol: float = 1e-10) -> Field:
    """Inverse transform; asserts the imaginary residue is negligible.

    A residue above ``imag_tol`` (relative to the field scale) means the
    coefficients were not Hermitian-symmetric and the spectral state is
    corrupted.
    """
    vals = np.fft.ifftn(F.coefficients) / F.grid.cell_volume
    scale = np.abs(vals.real).max()
    residue = np.abs(vals.imag).max()
    if residue > imag_tol * max(scale, 1e-300):
        raise SpectralSymmetryError(
            f"imaginary residue {residue:.3e} exceeds {imag_tol:.1e} x scale {scale:.3e}"
        )
    return Field(F.grid, vals.real)


def apply_multiplier(F: SpectralField, m: Multiplier) -> SpectralField:
    """Pointwise product with the symbol; zero mode treated per policy."""
    if F.grid != m.grid:
        raise ValueError("multiplier and spectral field live on different grids")
    out = F.coefficients * m.symbol
    origin = (0,) * F.grid.dim
    if m.zero_mode_policy == "force_zero":
        out[origin] = 0.0
    elif m.zero_mode_policy == "force_one":
        out[origin] = F.coefficients[origin]
    elif m.zero_mode_policy == "override":
        out[origin] = F.coefficients[origin] * m.zero_mode_value
    return SpectralField(F.grid, out)


def hermitian_deviation(F: SpectralField) -> float:
    """Max deviation from coefficient(-k) == conj(coefficient(k)), relative."""
    c = F.coefficients
    flipped = c
    for ax in range(c.ndim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    scale = np.abs(c).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(flipped - np.conj(c)).max() / scale)


def field_from_function(grid: Grid, fn) -> Field:
    """Sample a function of the coordinate arrays onto the grid."""
    return Field(grid, np.asarray(fn(*grid.coordinates), dtype=float))


def constant_field(grid: Grid, value: float) -> Field:
    return Field(grid, np.full(grid.shape, float(value)))


def mass(f: Field) -> float:
    """Discrete integral: spacing^n times the sample sum."""
    return float(f.grid.cell_volume * f.values.sum())


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p surrogate: (spacing^n sum |f|^p)^(1/p); p=inf is the grid max."""
    if np.isinf(p):
        return float(np.abs(f.values).max())
    if p <= 0:
        raise ValueError("norm exponent must be positive")
    return float((f.grid.cell_volume * (np.abs(f.values) ** p).sum()) ** (1.0 / p))


def dealias(f: Field) -> Field:
    """2/3-rule spectral truncation of a physical-space field."""
    coeffs = np.fft.fftn(f.values)
    coeffs[~f.grid.dealias_mask] = 0.0
    return Field(f.grid, np.fft.ifftn(coeffs).real)
