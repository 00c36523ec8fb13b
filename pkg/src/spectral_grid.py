"""
Truncated periodic grid on [-L, L) with Fourier differentiation, spectral
antidifferentiation, trapezoid quadrature and weighted Sobolev norms.

Fields are numpy arrays sampled on a Grid; the last axis is the spatial one,
so stacked fields are accepted wherever noted.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.errors import InvalidConfigError, ZeroMeanViolationError

ZERO_MEAN_TOLERANCE = 1e-10
INTERPOLATION_CHUNK = 1 << 21


def next_power_of_two(value: float) -> int:
    """Smallest power of two >= value (at least 2)."""
    n = 2
    while n < value:
        n *= 2
    return n


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic grid of n points on [-half_width, half_width).
    """

    half_width: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise InvalidConfigError(f"Grid half width must be positive, got {self.half_width}")
        if self.n < 2 or self.n & (self.n - 1):
            raise InvalidConfigError(f"Grid point count must be a power of two, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @cached_property
    def points(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in rfft layout, 0 .. pi/h."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.spacing)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep modes with index below n/3."""
        return np.arange(self.n // 2 + 1) < self.n / 3.0

    def scaled(self, factor: float) -> "Grid":
        """Same point count on [-factor L, factor L)."""
        return Grid(self.half_width * factor, self.n)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n)


def _spectral_multiplier(grid: Grid, order: int) -> np.ndarray:
    multiplier = (1j * grid.wavenumbers) ** order
    if order % 2 == 1:
        multiplier[-1] = 0.0
    return multiplier


def deriv(grid: Grid, values: np.ndarray, order: int = 1) -> np.ndarray:
    """
    Spectral derivative of a (stacked) field.

    Args:
        grid (Grid): Sampling grid
        values (np.ndarray): Samples, last axis of length n
        order (int): Derivative order, 0..4

    Returns:
        np.ndarray: Samples of the derivative; Nyquist mode zeroed for odd orders
    """
    if order not in range(5):
        raise ValueError(f"Derivative order must be in 0..4, got {order}")
    if order == 0:
        return np.array(values, dtype=float, copy=True)
    coefficients = np.fft.rfft(values, axis=-1)
    return np.fft.irfft(coefficients * _spectral_multiplier(grid, order), n=grid.n, axis=-1)


def antideriv_zero_mean(grid: Grid, values: np.ndarray, reference: float = 0.0) -> np.ndarray:
    """
    Antiderivative of a mean-zero field that vanishes at both ends of the domain.

    The periodic antiderivative is taken spectrally and shifted by the mean of
    its two endpoint values.

    Args:
        grid (Grid): Sampling grid
        values (np.ndarray): Samples of a numerically mean-zero field
        reference (float): Scale the zero-mean tolerance is measured against,
            in addition to the field's own sup-norm

    Returns:
        np.ndarray: Samples of the antiderivative

    Raises:
        ZeroMeanViolationError: If the grid mean exceeds 1e-10 of the scale
    """
    values = np.asarray(values, dtype=float)
    scale = max(float(np.max(np.abs(values))) if values.size else 0.0, reference)
    if scale == 0.0:
        return np.zeros_like(values)
    mean = float(np.mean(values))
    if abs(mean) > ZERO_MEAN_TOLERANCE * scale:
        raise ZeroMeanViolationError(
            f"Antiderivative needs a mean-zero field: mean {mean:.3e}, scale {scale:.3e}")

    coefficients = np.fft.rfft(values)
    xi = grid.wavenumbers
    primitive = np.zeros_like(coefficients)
    primitive[1:-1] = coefficients[1:-1] / (1j * xi[1:-1])
    periodic = np.fft.irfft(primitive, n=grid.n)
    return periodic - 0.5 * (periodic[0] + periodic[-1])


def quadrature(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Trapezoid rule on the periodic grid (h times the sum)."""
    return grid.spacing * np.sum(values, axis=-1)


def l2_norm(grid: Grid, values: np.ndarray) -> float:
    return float(np.sqrt(quadrature(grid, np.square(values))))


def spectral_l2_squared(grid: Grid, values: np.ndarray) -> float:
    """Integral of the squared field evaluated through Parseval's identity."""
    coefficients = np.fft.rfft(values)
    weights = np.full(coefficients.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    return float(grid.spacing / grid.n * np.sum(weights * np.abs(coefficients) ** 2))


def weighted_norm(grid: Grid, values: np.ndarray, k: int, m: float) -> float:
    """
    Weighted Sobolev norm: sum over l <= k of ||(1+|y|)^m d^l f||_{L^2}.
    """
    if k not in range(4):
        raise ValueError(f"Weighted norm order must be in 0..3, got {k}")
    weight = (1.0 + np.abs(grid.points)) ** m
    return float(sum(l2_norm(grid, weight * deriv(grid, values, order))
                     for order in range(k + 1)))


def moment(grid: Grid, values: np.ndarray, power: int = 0) -> float:
    """Trapezoid quadrature of y^power times the field, power in 0..2."""
    if power not in (0, 1, 2):
        raise ValueError(f"Moment power must be 0, 1 or 2, got {power}")
    return float(quadrature(grid, grid.points ** power * values))


def interpolate(grid: Grid, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    Trigonometric interpolant of a (stacked) field evaluated at arbitrary points.

    Args:
        grid (Grid): Grid the samples live on
        values (np.ndarray): Samples, last axis of length n
        points (np.ndarray): Evaluation points (taken periodically)

    Returns:
        np.ndarray: Interpolated values, last axis matching points
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    coefficients = np.fft.rfft(values, axis=-1) / grid.n
    weights = np.full(grid.n // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    coefficients = coefficients * weights
    xi = grid.wavenumbers

    offsets = points.ravel() + grid.half_width
    out = np.empty(values.shape[:-1] + (offsets.size,))
    chunk = max(1, INTERPOLATION_CHUNK // xi.size)
    for start in range(0, offsets.size, chunk):
        phase = np.exp(1j * np.outer(offsets[start:start + chunk], xi))
        out[..., start:start + chunk] = (coefficients @ phase.T).real
    return out.reshape(values.shape[:-1] + points.shape)
