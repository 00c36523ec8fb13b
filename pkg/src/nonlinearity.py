"""
Nonlinearity N(z) = mu z^2 + N~(z) with N~(z) = |z|^{p-1} z, its derivatives,
the Hoelder-type admissibility check and the dealiased flux d/dx N(u_x).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.errors import InvalidModelError, NumericalOverflowError
from src.spectral_grid import Grid

PAIR_EXCLUSION = 1e-12
SAMPLE_SCALES = (1.0, 10.0)


class TildeForm(Enum):
    NONE = "none"
    POWER_LAW = "power_law"
    CALLABLE = "callable"


@dataclass(frozen=True)
class NonlinearityModel:
    """
    Quadratic weight mu plus an optional higher-order part of order p >= 3.

    With tilde_form CALLABLE, tilde_funcs holds (N~, N~', N~'').
    """

    mu: float = 0.0
    p: float = 3.0
    tilde_form: TildeForm = TildeForm.NONE
    tilde_funcs: Optional[Sequence[Callable[[np.ndarray], np.ndarray]]] = field(
        default=None, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise InvalidModelError("mu must be finite")
        if not np.isfinite(self.p) or self.p < 3:
            raise InvalidModelError(
                f"Nonlinearity exponent must satisfy p >= 3 (assumption N), got p={self.p}")
        if self.tilde_form is TildeForm.CALLABLE and (
                self.tilde_funcs is None or len(self.tilde_funcs) != 3):
            raise InvalidModelError("Callable N~ needs (N~, N~', N~'')")

    @property
    def is_zero(self) -> bool:
        return self.mu == 0 and self.tilde_form is TildeForm.NONE


def tilde_eval(model: NonlinearityModel, z, order: int = 0):
    """Higher-order part N~ and its first two derivatives."""
    if order not in (0, 1, 2):
        raise ValueError(f"Nonlinearity derivative order must be 0, 1 or 2, got {order}")
    z = np.asarray(z, dtype=float)
    if model.tilde_form is TildeForm.NONE:
        return np.zeros_like(z)
    if model.tilde_form is TildeForm.CALLABLE:
        return np.asarray(model.tilde_funcs[order](z), dtype=float)

    p = model.p
    magnitude = np.abs(z)
    if order == 0:
        return magnitude ** (p - 1) * z
    if order == 1:
        return p * magnitude ** (p - 1)
    return p * (p - 1) * magnitude ** (p - 3) * z


def n_eval(model: NonlinearityModel, z, order: int = 0):
    """
    N^{(order)}(z) for scalar or array z.

    Args:
        model (NonlinearityModel): Nonlinearity model
        z: Argument(s)
        order (int): 0, 1 or 2

    Returns:
        Value(s) of the requested derivative
    """
    tilde = tilde_eval(model, z, order)
    z = np.asarray(z, dtype=float)
    if order == 0:
        quadratic = model.mu * z * z
    elif order == 1:
        quadratic = 2.0 * model.mu * z
    else:
        quadratic = np.full_like(z, 2.0 * model.mu)
    result = quadratic + tilde
    return float(result) if result.ndim == 0 else result


@dataclass
class HoelderRow:
    order: int
    scale: float
    max_ratio: float
    pairs_used: int


@dataclass
class AssumptionNReport:
    rows: List[HoelderRow]
    passed: bool
    vacuous: bool

    def max_ratio(self, order: int, scale: float) -> float:
        for row in self.rows:
            if row.order == order and row.scale == scale:
                return row.max_ratio
        raise KeyError((order, scale))


def verify_assumption_N(model: NonlinearityModel, sample_count: int,
                        seed: int = 0) -> AssumptionNReport:
    """
    Sample the Hoelder-type ratio of N~^{(j)} for j = 0, 1, 2 on [-1,1]^2 and [-10,10]^2.

    The same unit-square pairs are reused at each scale. The check passes when
    every ratio is finite and the ratio on the large square stays within a
    factor 2 of the small one.

    Args:
        model (NonlinearityModel): Nonlinearity model
        sample_count (int): Number of (z, w) pairs per scale
        seed (int): Random seed

    Returns:
        AssumptionNReport: Maximal ratio per (order, scale)
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    # same unit-square pairs at every scale
    z_unit = rng.uniform(-1.0, 1.0, sample_count)
    w_unit = rng.uniform(-1.0, 1.0, sample_count)
    rows = []
    for scale in SAMPLE_SCALES:
        z, w = scale * z_unit, scale * w_unit
        keep = np.abs(z - w) >= PAIR_EXCLUSION
        z, w = z[keep], w[keep]
        for order in (0, 1, 2):
            if model.tilde_form is TildeForm.NONE or z.size == 0:
                rows.append(HoelderRow(order, scale, 0.0, int(z.size)))
                continue
            difference = np.abs(np.asarray(tilde_eval(model, z, order))
                                - np.asarray(tilde_eval(model, w, order)))
            bound = (np.abs(z) + np.abs(w)) ** (model.p - 1 - order) * np.abs(z - w)
            ratio = difference / bound
            rows.append(HoelderRow(order, scale, float(np.max(ratio)), int(z.size)))

    passed = True
    for order in (0, 1, 2):
        small = next(r.max_ratio for r in rows if r.order == order and r.scale == SAMPLE_SCALES[0])
        large = next(r.max_ratio for r in rows if r.order == order and r.scale == SAMPLE_SCALES[1])
        if not (np.isfinite(small) and np.isfinite(large)) or large > 2.0 * small + 1e-12:
            passed = False
    return AssumptionNReport(rows=rows, passed=passed,
                             vacuous=model.tilde_form is TildeForm.NONE)


def _check_finite(values: np.ndarray, step: str):
    if not np.all(np.isfinite(values)):
        raise NumericalOverflowError(f"Non-finite values in nonlinear flux ({step})", step=step)


def nonlinear_flux_hat(model: NonlinearityModel, ux_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """
    rfft coefficients of d/dx N(u_x), given the rfft coefficients of u_x.

    The 2/3 rule is applied to u_x before the pointwise evaluation and to
    N(u_x) before the final derivative.
    """
    if model.is_zero:
        return np.zeros(grid.n // 2 + 1, dtype=complex)
    mask = grid.dealias_mask
    _check_finite(ux_hat, "input field")
    ux = np.fft.irfft(ux_hat * mask, n=grid.n)
    with np.errstate(over="ignore", invalid="ignore"):
        nz = n_eval(model, ux, 0)
    _check_finite(nz, "pointwise N evaluation")
    multiplier = 1j * grid.wavenumbers
    multiplier[-1] = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        flux_hat = np.fft.rfft(nz) * mask * multiplier
    _check_finite(flux_hat, "spectral derivative")
    return flux_hat


def nonlinear_flux(model: NonlinearityModel, ux: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Grid samples of d/dx N(u_x).

    Args:
        model (NonlinearityModel): Nonlinearity model
        ux (np.ndarray): Samples of u_x on grid
        grid (Grid): Active grid

    Returns:
        np.ndarray: Samples of the flux
    """
    ux = np.asarray(ux, dtype=float)
    if ux.shape != (grid.n,):
        raise ValueError(f"Field length {ux.shape} does not match grid size {grid.n}")
    _check_finite(ux, "input field")
    if model.is_zero:
        return np.zeros(grid.n)
    return np.fft.irfft(nonlinear_flux_hat(model, np.fft.rfft(ux), grid), n=grid.n)
