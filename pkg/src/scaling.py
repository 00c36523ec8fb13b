"""
Scaling variables s = log(R(t)+1), y = x / sqrt(R(t)+1).

Maps physical snapshots to (v, w), splits them into the Gaussian modes
m phi, m_s phi + m psi and the remainders (f, g), and evaluates the remainder
field h, the antiderivatives (F, G, H) and the mass equation.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.polynomial import hermite_e

from src.coefficients import (
    CoefficientModel,
    ScaledFactors,
    big_R,
    big_R_inverse,
    r_eval,
    scaled_factors,
    scaled_factors_at_time,
)
from src.errors import InsufficientDataError, InvalidCoefficientError, InvalidConfigError
from src.nonlinearity import NonlinearityModel, n_eval
from src.solver import PhysicalState
from src.spectral_grid import Grid, antideriv_zero_mean, deriv, interpolate, l2_norm, moment

UNIFORM_SPACING_TOLERANCE = 1e-9


def profile_phi(y: np.ndarray) -> np.ndarray:
    """Heat kernel at time one, (4 pi)^{-1/2} exp(-y^2/4)."""
    y = np.asarray(y, dtype=float)
    return np.exp(-0.25 * y * y) / math.sqrt(4.0 * math.pi)


def profile_derivative(y: np.ndarray, order: int) -> np.ndarray:
    """
    phi^{(order)}(y) = (-1)^order 2^{-order/2} He_order(y / sqrt 2) phi(y).
    """
    if order < 0:
        raise ValueError(f"Profile derivative order must be nonnegative, got {order}")
    y = np.asarray(y, dtype=float)
    coefficients = np.zeros(order + 1)
    coefficients[order] = 1.0
    hermite = hermite_e.hermeval(y / math.sqrt(2.0), coefficients)
    return (-1.0) ** order * 2.0 ** (-0.5 * order) * hermite * profile_phi(y)


def profile_psi(y: np.ndarray) -> np.ndarray:
    """psi = phi'' = phi (y^2 - 2) / 4."""
    return profile_derivative(y, 2)


@dataclass(frozen=True)
class ScaledState:
    """
    Snapshot in scaling variables.

    v = m phi + f and w = m_s phi + m psi + g; F, G_anti, H_anti are the
    antiderivatives of f, g, h vanishing at both ends.
    """

    s: float
    t: float
    grid: Grid
    v: np.ndarray
    w: np.ndarray
    m: float
    m_s: float
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    F: np.ndarray
    G_anti: np.ndarray
    H_anti: np.ndarray
    factors: ScaledFactors

    @property
    def y(self) -> np.ndarray:
        return self.grid.points

    @property
    def scale(self) -> float:
        """sqrt(R + 1) = e^{s/2}."""
        return math.exp(0.5 * self.s)


def _remainder(y: np.ndarray, m: float, m_s: float, factors: ScaledFactors,
               derivative: bool) -> np.ndarray:
    # psi^{(j)} = phi^{(j+2)}; the y-derivative shifts every profile by one order
    shift = 1 if derivative else 0
    psi = profile_derivative(y, 2 + shift)
    psi_y = profile_derivative(y, 3 + shift)
    psi_yy = profile_derivative(y, 4 + shift)
    if derivative:
        bracket = 2.0 * m_s * psi - 2.0 * m * psi - 0.5 * y * m * psi_y
    else:
        bracket = 2.0 * m_s * psi - 0.5 * y * m * psi_y - 1.5 * m * psi
    return -factors.c1 * bracket - factors.c2 * m * psi - factors.c4 * m * psi_yy


def remainder_h(y: np.ndarray, m: float, m_s: float, factors: ScaledFactors) -> np.ndarray:
    """
    Remainder field of the (f, g) system.

    h = -c1 (2 m_s psi - (y/2) m psi_y - (3/2) m psi) - c2 m psi - c4 m psi_yy

    Args:
        y (np.ndarray): Evaluation points
        m (float): Mass
        m_s (float): Mass derivative in s
        factors (ScaledFactors): Coefficient factors at s

    Returns:
        np.ndarray: Samples of h
    """
    return _remainder(np.asarray(y, dtype=float), m, m_s, factors, derivative=False)


def remainder_h_y(y: np.ndarray, m: float, m_s: float, factors: ScaledFactors) -> np.ndarray:
    """Analytic y-derivative of remainder_h."""
    return _remainder(np.asarray(y, dtype=float), m, m_s, factors, derivative=True)


def decompose(grid: Grid, s: float, t: float, v: np.ndarray, w: np.ndarray,
              factors: ScaledFactors) -> ScaledState:
    """
    Build a ScaledState from (v, w) samples.

    Raises:
        ZeroMeanViolationError: If f, g or h do not integrate to zero
    """
    y = grid.points
    phi = profile_phi(y)
    psi = profile_psi(y)
    m = moment(grid, v, 0)
    m_s = moment(grid, w, 0)
    f = v - m * phi
    g = w - m_s * phi - m * psi
    h = remainder_h(y, m, m_s, factors)
    reference_v = float(np.max(np.abs(v)))
    reference_w = max(float(np.max(np.abs(w))), reference_v)
    return ScaledState(
        s=s, t=t, grid=grid, v=v, w=w, m=m, m_s=m_s, f=f, g=g, h=h,
        F=antideriv_zero_mean(grid, f, reference=reference_v),
        G_anti=antideriv_zero_mean(grid, g, reference=reference_w),
        H_anti=antideriv_zero_mean(grid, h, reference=float(np.max(np.abs(h)))),
        factors=factors,
    )


def to_scaled(state: PhysicalState, coeff_model: CoefficientModel,
              y_grid: Optional[Grid] = None) -> ScaledState:
    """
    Transform a physical snapshot into scaling variables.

    Without y_grid the y-grid is the exact image of the state's grid. With a
    fixed y_grid the fields are resampled at x = y sqrt(R+1) by trigonometric
    interpolation.

    Args:
        state (PhysicalState): Physical snapshot
        coeff_model (CoefficientModel): Coefficient model
        y_grid (Optional[Grid]): Target grid in y

    Returns:
        ScaledState: Decomposed snapshot

    Raises:
        InvalidConfigError: If the scaled image of y_grid leaves the x-domain
    """
    R = big_R(coeff_model, state.t)
    scale = math.sqrt(R + 1.0)
    factors = scaled_factors_at_time(coeff_model, state.t)

    if y_grid is None:
        y_grid = state.grid.scaled(1.0 / scale)
        u, ut = state.u, state.ut
    else:
        needed = y_grid.half_width * scale
        if needed > state.grid.half_width * (1.0 + 1e-12):
            raise InvalidConfigError(
                f"x-domain half width {state.grid.half_width:.6g} cannot hold the scaled "
                f"y-grid image {needed:.6g} at t={state.t:.6g}")
        u, ut = interpolate(state.grid, np.vstack([state.u, state.ut]), y_grid.points * scale)

    v = scale * u
    w = scale ** 3 / factors.r * ut
    return decompose(y_grid, factors.s, state.t, v, w, factors)


def from_scaled(scaled: ScaledState, coeff_model: CoefficientModel) -> PhysicalState:
    """
    Inverse of to_scaled on the image grid x = y e^{s/2}.
    """
    t = big_R_inverse(coeff_model, math.expm1(scaled.s))
    scale = math.exp(0.5 * scaled.s)
    r = r_eval(coeff_model, t).r
    return PhysicalState(t=t, grid=scaled.grid.scaled(scale), u=scaled.v / scale,
                         ut=r / scale ** 3 * scaled.w)


def uniform_step(s_values: Sequence[float], minimum: int = 3) -> float:
    """
    Common spacing of an s series.

    Raises:
        InsufficientDataError: Fewer than minimum samples or non-uniform spacing
    """
    s_values = np.asarray(s_values, dtype=float)
    if s_values.size < minimum:
        raise InsufficientDataError(
            f"Need at least {minimum} samples, got {s_values.size}")
    steps = np.diff(s_values)
    ds = float(steps[0])
    if ds <= 0 or np.any(np.abs(steps - ds) > UNIFORM_SPACING_TOLERANCE * max(1.0, ds)):
        raise InsufficientDataError("s samples must be uniformly spaced and increasing")
    return ds


def mass_ode_residual(s: Sequence[float], m: Sequence[float], m_s: Sequence[float],
                      coeff_model: CoefficientModel,
                      m_ss: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Residual of c1 (m_ss - m_s) + (1 + c2) m_s = 0.

    Without m_ss, it is taken from centered differences of m_s and only
    interior samples are reported.

    Args:
        s (Sequence[float]): Scaled times
        m (Sequence[float]): Mass samples
        m_s (Sequence[float]): Mass derivative samples
        coeff_model (CoefficientModel): Coefficient model
        m_ss (Optional[Sequence[float]]): Second derivative samples if known

    Returns:
        pd.DataFrame: Columns s, m, m_s, m_ss, residual
    """
    s = np.asarray(s, dtype=float)
    m = np.asarray(m, dtype=float)
    m_s = np.asarray(m_s, dtype=float)
    if m_ss is None:
        if s.size < 3:
            raise InsufficientDataError("Mass equation residual needs at least 3 samples")
        m_ss = np.gradient(m_s, s, edge_order=2)
        interior = slice(1, -1)
    else:
        m_ss = np.asarray(m_ss, dtype=float)
        interior = slice(None)
    factors = [scaled_factors(coeff_model, si) for si in s]
    c1 = np.array([f.c1 for f in factors])
    c2 = np.array([f.c2 for f in factors])
    residual = c1 * (m_ss - m_s) + (1.0 + c2) * m_s
    frame = pd.DataFrame({"s": s, "m": m, "m_s": m_s, "m_ss": m_ss, "residual": residual})
    return frame.iloc[interior].reset_index(drop=True)


def snapshot_schedule(s_max: float, per_unit_s: float, coeff_model: CoefficientModel,
                      t_max: float = np.inf) -> pd.DataFrame:
    """
    Uniform s schedule s_k = k / per_unit_s mapped to t_k = R^{-1}(e^{s_k} - 1).

    The schedule stops early where R cannot reach e^s - 1 or t exceeds t_max.
    """
    if s_max < 0 or per_unit_s <= 0:
        raise InvalidConfigError("s_max must be nonnegative and snapshots_per_unit_s positive")
    count = int(round(s_max * per_unit_s)) + 1
    s_values, t_values = [], []
    for k in range(count):
        s = k / per_unit_s
        try:
            t = big_R_inverse(coeff_model, math.expm1(s))
        except (InvalidCoefficientError, OverflowError):
            break
        if t > t_max:
            break
        s_values.append(s)
        t_values.append(t)
    return pd.DataFrame({"s": s_values, "t": t_values})


def scaled_system_residuals(states: List[ScaledState], coeff_model: CoefficientModel,
                            nonlin_model: NonlinearityModel) -> pd.DataFrame:
    """
    L2 norms of the defects of the scaled evolution equations.

    Columns: v_equation (v_s - y v_y/2 - v/2 - w), f_equation (same for f, g)
    and w_equation (the second-order equation for w), with s-derivatives by
    centered differences at interior snapshots.
    """
    ds = uniform_step([state.s for state in states])
    rows = []
    for before, state, after in zip(states, states[1:], states[2:]):
        grid, y, fac = state.grid, state.y, state.factors
        v_s = (after.v - before.v) / (2.0 * ds)
        f_s = (after.f - before.f) / (2.0 * ds)
        w_s = (after.w - before.w) / (2.0 * ds)
        v_y = deriv(grid, state.v, 1)
        v_yy = deriv(grid, state.v, 2)
        z = math.exp(-state.s) * v_y
        nonlinear = fac.es_over_a * n_eval(nonlin_model, z, 1) * math.exp(-state.s) * v_yy
        w_defect = (fac.c1 * (w_s - 0.5 * y * deriv(grid, state.w, 1) - 1.5 * state.w)
                    + (1.0 + fac.c2) * state.w - v_yy + fac.c4 * deriv(grid, state.v, 4)
                    - nonlinear)
        rows.append({
            "s": state.s,
            "v_equation": l2_norm(grid, v_s - 0.5 * y * v_y - 0.5 * state.v - state.w),
            "f_equation": l2_norm(grid, f_s - 0.5 * y * deriv(grid, state.f, 1)
                                  - 0.5 * state.f - state.g),
            "w_equation": l2_norm(grid, w_defect),
        })
    return pd.DataFrame(rows, columns=["s", "v_equation", "f_equation", "w_equation"])
