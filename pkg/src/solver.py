"""
Time integration of U = (u, u_t) for

    u_tt + b(t) u_t - a(t) u_xx + u_xxxx = d/dx N(u_x)

in Duhamel (mild-solution) form: the beam semigroup is applied exactly per
Fourier mode and the forcing K = (0, -b u_t + a u_xx + flux) is integrated by
an exponential midpoint (or Euler) rule with step-doubling control.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.coefficients import CoefficientModel, eval_coeffs
from src.debug_log import DebugLog
from src.errors import (
    BlowUpDetectedError,
    InsufficientDataError,
    InvalidConfigError,
    NumericalOverflowError,
    StiffnessFailureError,
)
from src.nonlinearity import NonlinearityModel, nonlinear_flux_hat
from src.spectral_grid import Grid, deriv, quadrature

PROPAGATOR_CACHE_SIZE = 16


class Scheme(Enum):
    EXP_MIDPOINT = "exp_midpoint"
    EXP_EULER = "exp_euler"


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Step-size control for the beam integrator.

    With adaptive off, every step uses dt_initial (shortened only to land on
    snapshot times).
    """

    dt_initial: float = 1e-2
    dt_max: float = 0.25
    safety: float = 0.9
    error_tol: float = 1e-9
    scheme: Scheme = Scheme.EXP_MIDPOINT
    adaptive: bool = True
    blowup_threshold: float = 1e8
    dt_min: float = 1e-12
    absorb_tension: bool = True

    def __post_init__(self):
        if not (self.dt_initial > 0 and self.dt_max > 0):
            raise InvalidConfigError("dt_initial and dt_max must be positive")
        if self.dt_initial > self.dt_max:
            raise InvalidConfigError(
                f"dt_initial ({self.dt_initial}) must not exceed dt_max ({self.dt_max})")
        if not 0 < self.safety <= 1:
            raise InvalidConfigError(f"safety must be in (0, 1], got {self.safety}")
        if not self.error_tol > 0:
            raise InvalidConfigError(f"error_tol must be positive, got {self.error_tol}")


@dataclass(frozen=True)
class PhysicalState:
    t: float
    grid: Grid
    u: np.ndarray
    ut: np.ndarray

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"State time must be nonnegative, got {self.t}")
        for name in ("u", "ut"):
            if np.shape(getattr(self, name)) != (self.grid.n,):
                raise ValueError(f"{name} has shape {np.shape(getattr(self, name))}, "
                                 f"expected ({self.grid.n},)")

    @property
    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.u)), np.max(np.abs(self.ut))))


@dataclass
class Trajectory:
    snapshots: List[PhysicalState] = field(default_factory=list)
    final_state: Optional[PhysicalState] = None
    accepted_steps: int = 0
    rejected_steps: int = 0
    min_dt: float = np.inf
    max_dt: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([state.t for state in self.snapshots])


def beam_propagator(grid: Grid, dt: float, tension: float = 0.0) -> np.ndarray:
    """
    Per-mode 2x2 blocks of exp(dt A), A = [[0, 1], [-(d^4 - tension d^2), 0]].

    Args:
        grid (Grid): Grid whose rfft wavenumbers index the blocks
        dt (float): Time step, dt >= 0
        tension (float): Constant tension absorbed into the semigroup, >= 0

    Returns:
        np.ndarray: Array of shape (n//2 + 1, 2, 2)
    """
    if dt < 0:
        raise ValueError(f"Propagator step must be nonnegative, got {dt}")
    if tension < 0:
        raise ValueError(f"Propagator tension must be nonnegative, got {tension}")
    xi2 = grid.wavenumbers ** 2
    omega = np.sqrt(xi2 * xi2 + tension * xi2)
    phase = omega * dt
    blocks = np.empty((xi2.size, 2, 2))
    blocks[:, 0, 0] = np.cos(phase)
    blocks[:, 0, 1] = dt * np.sinc(phase / np.pi)
    blocks[:, 1, 0] = -omega * np.sin(phase)
    blocks[:, 1, 1] = blocks[:, 0, 0]
    return blocks


def _apply(blocks: np.ndarray, uh: np.ndarray, vh: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return (blocks[:, 0, 0] * uh + blocks[:, 0, 1] * vh,
            blocks[:, 1, 0] * uh + blocks[:, 1, 1] * vh)


class BeamIntegrator(DebugLog):
    """
    Exponential integrator for the damped beam equation on a periodic grid.
    """

    def __init__(self, coeff_model: CoefficientModel, nonlin_model: NonlinearityModel,
                 config: Optional[IntegratorConfig] = None, tension: Optional[float] = None,
                 debug: bool = False):
        """
        Args:
            coeff_model (CoefficientModel): Coefficients a(t), b(t)
            nonlin_model (NonlinearityModel): Nonlinearity N
            config (Optional[IntegratorConfig]): Step control, defaults if omitted
            tension (Optional[float]): Tension absorbed into the propagator; by
                default a(t0) when config.absorb_tension is set, else 0
            debug (bool): Whether to print step diagnostics
        """
        self.coeff_model = coeff_model
        self.nonlin_model = nonlin_model
        self.config = config or IntegratorConfig()
        self.tension = tension
        self.debug = debug
        self._propagators: Dict[Tuple[Grid, float], np.ndarray] = {}

    def debug_settings(self):
        return {"alpha": self.coeff_model.alpha, "beta": self.coeff_model.beta,
                "family": self.coeff_model.family.value, "mu": self.nonlin_model.mu,
                "p": self.nonlin_model.p, "scheme": self.config.scheme.value,
                "adaptive": self.config.adaptive, "error_tol": self.config.error_tol}

    def _resolve_tension(self, t0: float) -> float:
        if self.tension is None:
            self.tension = (eval_coeffs(self.coeff_model, t0).a
                            if self.config.absorb_tension else 0.0)
        return self.tension

    def _propagator(self, grid: Grid, dt: float) -> np.ndarray:
        key = (grid, dt)
        blocks = self._propagators.get(key)
        if blocks is None:
            if len(self._propagators) >= PROPAGATOR_CACHE_SIZE:
                self._propagators.clear()
            blocks = beam_propagator(grid, dt, self.tension)
            self._propagators[key] = blocks
        return blocks

    def forcing_hat(self, grid: Grid, t: float, uh: np.ndarray, vh: np.ndarray) -> np.ndarray:
        """rfft coefficients of the second component of K, net of the absorbed tension."""
        c = eval_coeffs(self.coeff_model, t)
        xi = grid.wavenumbers
        second = -c.b * vh - (c.a - self.tension) * xi * xi * uh
        if not self.nonlin_model.is_zero:
            ux_hat = 1j * xi * uh
            ux_hat[-1] = 0.0
            second = second + nonlinear_flux_hat(self.nonlin_model, ux_hat, grid)
        return second

    def _advance(self, grid: Grid, t: float, uh: np.ndarray, vh: np.ndarray,
                 dt: float) -> Tuple[np.ndarray, np.ndarray]:
        k0 = self.forcing_hat(grid, t, uh, vh)
        if self.config.scheme is Scheme.EXP_EULER:
            return _apply(self._propagator(grid, dt), uh, vh + dt * k0)

        half = self._propagator(grid, 0.5 * dt)
        u_mid, v_mid = _apply(half, uh, vh + 0.5 * dt * k0)
        k_mid = self.forcing_hat(grid, t + 0.5 * dt, u_mid, v_mid)
        u_free, v_free = _apply(self._propagator(grid, dt), uh, vh)
        return (u_free + half[:, 0, 1] * dt * k_mid,
                v_free + half[:, 1, 1] * dt * k_mid)

    def step(self, state: PhysicalState, dt: float) -> PhysicalState:
        """
        One step of the configured scheme, without error control.

        Args:
            state (PhysicalState): State at time t
            dt (float): Step, dt > 0

        Returns:
            PhysicalState: State at t + dt
        """
        if not dt > 0:
            raise ValueError(f"Step size must be positive, got {dt}")
        self._resolve_tension(state.t)
        grid = state.grid
        uh, vh = self._advance(grid, state.t, np.fft.rfft(state.u), np.fft.rfft(state.ut), dt)
        return PhysicalState(t=state.t + dt, grid=grid,
                             u=np.fft.irfft(uh, n=grid.n), ut=np.fft.irfft(vh, n=grid.n))

    def _check_blowup(self, t: float, u: np.ndarray, ut: np.ndarray):
        with np.errstate(invalid="ignore"):
            sup = float(max(np.max(np.abs(u)), np.max(np.abs(ut))))
        if not np.isfinite(sup) or sup > self.config.blowup_threshold:
            raise BlowUpDetectedError(
                f"Solution blew up at t={t:.6g} (sup-norm {sup:.3e})", t=t, sup_norm=sup)

    def integrate(self, initial: PhysicalState, t_end: float,
                  snapshot_times: Optional[Iterable[float]] = None,
                  on_snapshot: Optional[Callable[[PhysicalState], None]] = None,
                  keep_snapshots: bool = True) -> Trajectory:
        """
        Integrate from initial.t to t_end, emitting snapshots at the requested times.

        Args:
            initial (PhysicalState): Initial state
            t_end (float): Final time
            snapshot_times (Optional[Iterable[float]]): Increasing times in
                [initial.t, t_end]; defaults to the two endpoints
            on_snapshot (Optional[Callable]): Called with every emitted snapshot
            keep_snapshots (bool): Whether to store snapshots in the trajectory

        Returns:
            Trajectory: Snapshots, final state and step statistics
        """
        t0 = initial.t
        if t_end < t0:
            raise InvalidConfigError(f"t_end ({t_end}) precedes the initial time ({t0})")
        if snapshot_times is None:
            targets = [t0] if t_end == t0 else [t0, t_end]
        else:
            targets = [float(t) for t in snapshot_times]
        time_tol = 1e-12 * max(1.0, abs(t_end))
        if any(b <= a for a, b in zip(targets, targets[1:])):
            raise InvalidConfigError("Snapshot times must be strictly increasing")
        if targets and (targets[0] < t0 - time_tol or targets[-1] > t_end + time_tol):
            raise InvalidConfigError(f"Snapshot times must lie in [{t0}, {t_end}]")

        self._resolve_tension(t0)
        grid = initial.grid
        trajectory = Trajectory()
        config = self.config

        def emit(t_snap: float, uh: np.ndarray, vh: np.ndarray):
            state = PhysicalState(t=t_snap, grid=grid, u=np.fft.irfft(uh, n=grid.n),
                                  ut=np.fft.irfft(vh, n=grid.n))
            self._debug_print(f"snapshot t={t_snap:.6g}")
            if on_snapshot is not None:
                on_snapshot(state)
            if keep_snapshots:
                trajectory.snapshots.append(state)

        t = t0
        uh, vh = np.fft.rfft(initial.u), np.fft.rfft(initial.ut)
        dt = config.dt_initial
        index = 0

        if t_end == t0:
            if targets:
                emit(t0, uh, vh)
            trajectory.final_state = initial
            return trajectory

        while True:
            stop = targets[index] if index < len(targets) else t_end
            if stop - t <= time_tol:
                if index < len(targets):
                    t = stop
                    emit(t, uh, vh)
                    index += 1
                    continue
                break

            h = min(dt, stop - t)
            landing = h >= stop - t

            if not config.adaptive:
                try:
                    uh, vh = self._advance(grid, t, uh, vh, h)
                except NumericalOverflowError as e:
                    raise BlowUpDetectedError(
                        f"Solution blew up at t={t:.6g}: {e}", t=t, sup_norm=np.inf) from e
                t = stop if landing else t + h
                self._record(trajectory, h)
                self._check_blowup(t, np.fft.irfft(uh, n=grid.n), np.fft.irfft(vh, n=grid.n))
                continue

            try:
                u_full, v_full = self._advance(grid, t, uh, vh, h)
                u_half, v_half = self._advance(grid, t, uh, vh, 0.5 * h)
                u_two, v_two = self._advance(grid, t + 0.5 * h, u_half, v_half, 0.5 * h)
                u_two_x = np.fft.irfft(u_two, n=grid.n)
                v_two_x = np.fft.irfft(v_two, n=grid.n)
                with np.errstate(invalid="ignore", over="ignore"):
                    difference = max(np.max(np.abs(np.fft.irfft(u_two - u_full, n=grid.n))),
                                     np.max(np.abs(np.fft.irfft(v_two - v_full, n=grid.n))))
                    scale = max(np.max(np.abs(u_two_x)), np.max(np.abs(v_two_x)),
                                np.finfo(float).tiny)
                    error = float(difference / scale)
            except NumericalOverflowError as e:
                self._debug_print(f"overflow at t={t:.6g}, dt={h:.3e}: {e}")
                error = np.inf

            if np.isfinite(error) and error <= config.error_tol:
                uh, vh = u_two, v_two
                t = stop if landing else t + h
                self._record(trajectory, h)
                self._check_blowup(t, u_two_x, v_two_x)
                if error == 0:
                    factor = 2.0
                else:
                    factor = min(2.0, config.safety * (config.error_tol / error) ** (1.0 / 3.0))
                if not (landing and h < dt):
                    dt = min(config.dt_max, h * factor)
            else:
                trajectory.rejected_steps += 1
                dt = 0.5 * h
                self._debug_print(f"reject t={t:.6g}, dt={h:.3e}, err={error:.3e}")
                if dt < config.dt_min:
                    state = PhysicalState(t=t, grid=grid, u=np.fft.irfft(uh, n=grid.n),
                                          ut=np.fft.irfft(vh, n=grid.n))
                    raise StiffnessFailureError(
                        f"Step size {dt:.3e} fell below {config.dt_min:.1e} at t={t:.6g}",
                        t=t, dt=dt, state=state)

        trajectory.final_state = PhysicalState(t=t, grid=grid, u=np.fft.irfft(uh, n=grid.n),
                                               ut=np.fft.irfft(vh, n=grid.n))
        self._debug_print(f"done: {trajectory.accepted_steps} accepted, "
                          f"{trajectory.rejected_steps} rejected steps")
        return trajectory

    @staticmethod
    def _record(trajectory: Trajectory, h: float):
        trajectory.accepted_steps += 1
        trajectory.min_dt = min(trajectory.min_dt, h)
        trajectory.max_dt = max(trajectory.max_dt, h)


def forcing(state: PhysicalState, coeff_model: CoefficientModel,
            nonlin_model: NonlinearityModel) -> Tuple[np.ndarray, np.ndarray]:
    """
    The pair K = (0, -b u_t + a u_xx + d/dx N(u_x)) at the state's time.
    """
    integrator = BeamIntegrator(coeff_model, nonlin_model, tension=0.0)
    grid = state.grid
    second = integrator.forcing_hat(grid, state.t, np.fft.rfft(state.u), np.fft.rfft(state.ut))
    return np.zeros(grid.n), np.fft.irfft(second, n=grid.n)


def step(state: PhysicalState, dt: float, coeff_model: CoefficientModel,
         nonlin_model: NonlinearityModel, config: Optional[IntegratorConfig] = None,
         tension: Optional[float] = None) -> PhysicalState:
    """One step of the configured exponential scheme."""
    return BeamIntegrator(coeff_model, nonlin_model, config, tension=tension).step(state, dt)


def integrate(initial: PhysicalState, t_end: float, snapshot_times: Optional[Iterable[float]],
              coeff_model: CoefficientModel, nonlin_model: NonlinearityModel,
              config: Optional[IntegratorConfig] = None,
              on_snapshot: Optional[Callable[[PhysicalState], None]] = None,
              keep_snapshots: bool = True) -> Trajectory:
    """Integrate with a fresh BeamIntegrator; see BeamIntegrator.integrate."""
    integrator = BeamIntegrator(coeff_model, nonlin_model, config)
    return integrator.integrate(initial, t_end, snapshot_times, on_snapshot=on_snapshot,
                                keep_snapshots=keep_snapshots)


def beam_energy(state: PhysicalState, tension: float = 1.0) -> float:
    """Integral of u_t^2 + tension u_x^2 + u_xx^2."""
    grid = state.grid
    ux = deriv(grid, state.u, 1)
    uxx = deriv(grid, state.u, 2)
    return float(quadrature(grid, state.ut ** 2 + tension * ux ** 2 + uxx ** 2))


def mass_law_residual(states: List[PhysicalState], coeff_model: CoefficientModel) -> pd.DataFrame:
    """
    Residual of M'' + b M' = 0 with M = int u and M' = int u_t.

    M'' is taken from second-order differences of the logged M'; only
    interior samples are reported.
    """
    if len(states) < 3:
        raise InsufficientDataError("Mass law residual needs at least 3 snapshots")
    t = np.array([state.t for state in states])
    mass = np.array([float(quadrature(state.grid, state.u)) for state in states])
    flux = np.array([float(quadrature(state.grid, state.ut)) for state in states])
    b = np.array([eval_coeffs(coeff_model, ti).b for ti in t])
    residual = np.gradient(flux, t, edge_order=2) + b * flux
    return pd.DataFrame({"t": t, "M": mass, "M_t": flux, "residual": residual}).iloc[1:-1]
