"""
One simulation run end to end: integrate, transform every snapshot to scaling
variables, evaluate energies and identities, and measure the decay of the
Gaussian-profile error.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.analysis import estimate_m_star, fit_decay_rate, profile_error
from src.coefficients import RegionLabel, classify_region, exponent_constants
from src.debug_log import DebugLog
from src.energy import evaluate_report, specialized_identity_residuals
from src.errors import InsufficientDataError
from src.report_writer import SCHEMA_VERSION
from src.run_config import RunConfig, data_size, initial_data, x_grid
from src.scaling import (
    ScaledState,
    from_scaled,
    mass_ode_residual,
    profile_phi,
    scaled_system_residuals,
    snapshot_schedule,
    to_scaled,
)
from src.solver import BeamIntegrator, PhysicalState
from src.spectral_grid import l2_norm, quadrature

MIN_SNAPSHOTS = 8
MIN_R_SQUARED = 0.95
ZERO_MEAN_LIMIT = 1e-9
SETTLED_S = 2.0


@dataclass
class SimulationResult:
    config: RunConfig
    snapshots: pd.DataFrame
    energy: pd.DataFrame
    identities: pd.DataFrame
    mass: pd.DataFrame
    profile_error: pd.DataFrame
    scaled_residuals: pd.DataFrame
    summary: Dict[str, object]
    scaled_states: List[ScaledState] = field(default_factory=list, repr=False)


def _zero_mean_ratio(state: ScaledState) -> float:
    """Largest |int field| relative to the field's scale over f, g and h."""
    grid = state.grid
    sup_v = float(np.max(np.abs(state.v)))
    sup_w = float(np.max(np.abs(state.w)))
    worst = 0.0
    for values, floor in ((state.f, sup_v), (state.g, max(sup_v, sup_w)), (state.h, 0.0)):
        scale = max(float(np.max(np.abs(values))), 1e-12 * floor)
        if scale > 0:
            worst = max(worst, abs(float(quadrature(grid, values))) / scale)
    return worst


class SimulationPipeline(DebugLog):
    """
    Runs one configuration and collects every table the run produces.
    """

    def __init__(self, config: RunConfig, debug: bool = False, debug_file: Optional[str] = None):
        """
        Args:
            config (RunConfig): Validated run configuration
            debug (bool): Whether to output detailed debug information
            debug_file (Optional[str]): Path to a file to write debug output
        """
        self.config = config
        self.coeff_model = config.coefficient_model()
        self.nonlin_model = config.nonlinearity_model()
        self.weights = config.energy_weights()
        self.set_debug(debug, debug_file)

    def debug_settings(self):
        return {"alpha": self.config.alpha, "beta": self.config.beta, "mu": self.config.mu,
                "p": self.config.p, "L": self.config.L, "n": self.config.n,
                "s_max": self.config.s_max, "epsilon": self.config.epsilon,
                "data_variant": self.config.data_variant}

    def _integrate(self, schedule: pd.DataFrame) -> List[ScaledState]:
        config = self.config
        R_end = math.expm1(float(schedule["s"].iloc[-1]))
        xg = x_grid(config, R_end)
        yg = config.y_grid()
        u0, u1 = initial_data(config, xg)
        self._debug_print(f"x-grid: half width {xg.half_width:.4g}, {xg.n} points; "
                          f"y-grid: half width {yg.half_width:.4g}, {yg.n} points")

        integrator = BeamIntegrator(self.coeff_model, self.nonlin_model,
                                    config.integrator_config(), debug=self.debug)
        integrator.debug_file = self.debug_file
        states: List[ScaledState] = []

        def collect(state: PhysicalState):
            scaled = to_scaled(state, self.coeff_model, yg)
            states.append(scaled)
            self._debug_print(f"snapshot s={scaled.s:.4f} t={state.t:.6g} m={scaled.m:.6e} "
                              f"m_s={scaled.m_s:.3e}")

        trajectory = integrator.integrate(
            PhysicalState(t=0.0, grid=xg, u=u0, ut=u1), float(schedule["t"].iloc[-1]),
            schedule["t"].tolist(), on_snapshot=collect, keep_snapshots=False)
        self.steps = {"accepted_steps": trajectory.accepted_steps,
                      "rejected_steps": trajectory.rejected_steps,
                      "min_dt": float(trajectory.min_dt), "max_dt": float(trajectory.max_dt)}
        self.data_size = data_size(xg, u0, u1)
        return states

    def _snapshot_table(self, states: List[ScaledState]) -> pd.DataFrame:
        stride = self.config.snapshot_stride
        chosen = states[::stride]
        if chosen[-1] is not states[-1]:
            chosen.append(states[-1])
        frames = [pd.DataFrame({"s": st.s, "t": st.t, "half_width": st.grid.half_width,
                                "n": st.grid.n, "y": st.y, "v": st.v, "w": st.w})
                  for st in chosen]
        return pd.concat(frames, ignore_index=True)

    def _profile_table(self, states: List[ScaledState], m_star: float) -> pd.DataFrame:
        rows = []
        for st in states:
            physical = from_scaled(st, self.coeff_model)
            R = math.expm1(st.s)
            errors = profile_error(physical, m_star, self.coeff_model, include_raw=R > 0)
            rows.append({
                "s": st.s, "t": st.t, "R": R,
                "err_shift": errors["err_shift"],
                "err_raw": errors.get("err_raw", np.nan),
                "scaled_err": math.exp(-0.25 * st.s) * l2_norm(
                    st.grid, st.v - m_star * profile_phi(st.y)),
            })
        return pd.DataFrame(rows, columns=["s", "t", "R", "err_shift", "err_raw", "scaled_err"])

    def run(self, exploratory: bool = False) -> SimulationResult:
        """
        Execute the run.

        Args:
            exploratory (bool): Mark the run as outside the decay theorem's
                region (set by --force and by sweeps outside Omega1)

        Returns:
            SimulationResult: Tables and summary

        Raises:
            InsufficientDataError: If the schedule holds fewer than 8 snapshots
            BlowUpDetectedError: If the solution exceeds the blow-up threshold
        """
        config = self.config
        schedule = snapshot_schedule(config.s_max, config.snapshots_per_unit_s,
                                     self.coeff_model, config.t_max)
        if len(schedule) < MIN_SNAPSHOTS:
            raise InsufficientDataError(
                f"Snapshot schedule holds {len(schedule)} snapshots (need {MIN_SNAPSHOTS}); "
                f"R(t) may be bounded or t_max too small")
        self._debug_print(f"Schedule: {len(schedule)} snapshots up to s={schedule['s'].iloc[-1]:.4g}, "
                          f"t={schedule['t'].iloc[-1]:.6g}")

        states = self._integrate(schedule)
        identities = specialized_identity_residuals(states, self.nonlin_model)
        reports = []
        for st in states:
            report = evaluate_report(st, self.nonlin_model, self.weights)
            if st.s in identities.index:
                report.identity_residuals = identities.loc[st.s].to_dict()
            reports.append(report)
        energy = pd.DataFrame([report.to_row() for report in reports])

        s_values = np.array([st.s for st in states])
        m_values = np.array([st.m for st in states])
        mass = mass_ode_residual(s_values, m_values, [st.m_s for st in states], self.coeff_model)
        scaled_residuals = scaled_system_residuals(states, self.coeff_model, self.nonlin_model)

        mass_limit = estimate_m_star(s_values, m_values)
        profile = self._profile_table(states, mass_limit["m_star"])
        fit = fit_decay_rate(profile["s"], profile["err_shift"], config.fit_window)

        summary = self._summarize(states, energy, identities, mass_limit, fit, exploratory)
        self._debug_print(f"slope {fit.slope:.4f} (r^2 {fit.r_squared:.4f}), "
                          f"m* {mass_limit['m_star']:.6e}, passed {summary['passed']}")
        return SimulationResult(
            config=config, snapshots=self._snapshot_table(states), energy=energy,
            identities=identities.reset_index(), mass=mass, profile_error=profile,
            scaled_residuals=scaled_residuals, summary=summary, scaled_states=states)

    def _summarize(self, states, energy, identities, mass_limit, fit, exploratory) -> Dict[str, object]:
        config = self.config
        region = classify_region(config.alpha, config.beta)
        in_theorem = region is RegionLabel.OMEGA1 and not exploratory

        lam = predicted = None
        if region is RegionLabel.OMEGA1:
            constants = exponent_constants(config.alpha, config.beta)
            lam = config.lambda_fraction * constants.lambda_max
            predicted = -(0.25 + 0.5 * lam)

        settled = energy[energy["s"] >= SETTLED_S - 1e-9]
        bound_columns = [c for c in energy.columns if c.startswith("lower_bound_")]
        lower_bounds_ok = bool(settled[bound_columns].all().all()) if len(settled) else True
        if len(settled):
            reference = abs(float(settled["calE_tilde"].iloc[0]))
            energy_bounded = bool(settled["calE_tilde"].abs().max() <= 2.0 * reference + 1e-300)
        else:
            energy_bounded = True
        zero_mean_max = max(_zero_mean_ratio(st) for st in states)

        checks = {
            "slope": fit.slope <= config.slope_threshold,
            "r_squared": fit.r_squared >= MIN_R_SQUARED,
            "zero_mean": zero_mean_max <= ZERO_MEAN_LIMIT,
            "lower_bounds": lower_bounds_ok,
            "energy_bounded": energy_bounded,
        }
        return {
            "schema_version": SCHEMA_VERSION,
            "alpha": config.alpha,
            "beta": config.beta,
            "region": region.value,
            "exploratory": not in_theorem,
            "m_star": mass_limit["m_star"],
            "tail_spread": mass_limit["tail_spread"],
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "fit_window": list(fit.window),
            "fit_samples": fit.sample_count,
            "lambda": lam,
            "predicted_slope": predicted,
            "slope_threshold": config.slope_threshold,
            "data_size": self.data_size,
            "snapshot_count": len(states),
            "s_end": states[-1].s,
            "t_end": states[-1].t,
            "max_identity_residual": float(identities.max().max()),
            "zero_mean_max": zero_mean_max,
            **self.steps,
            "checks": checks,
            "passed": in_theorem and all(checks.values()),
        }
