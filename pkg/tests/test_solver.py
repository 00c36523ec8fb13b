import math
import unittest

import numpy as np

from src.coefficients import CoefficientModel
from src.errors import BlowUpDetectedError, InvalidConfigError
from src.nonlinearity import NonlinearityModel, TildeForm
from src.solver import (
    BeamIntegrator,
    IntegratorConfig,
    PhysicalState,
    beam_energy,
    beam_propagator,
    forcing,
    mass_law_residual,
    step,
)
from src.spectral_grid import Grid, l2_norm


def pure_beam_model():
    """a = 1, b = 0: the undamped beam with unit tension."""
    return CoefficientModel.user_supplied(
        a=lambda t: 1.0, b=lambda t: 0.0, a_prime=lambda t: 0.0, b_prime=lambda t: 0.0,
        require_positive=False)


class TestSolver(unittest.TestCase):

    def setUp(self):
        self.grid = Grid(20.0, 256)
        self.x = self.grid.points
        self.damped = CoefficientModel.power_law(0.0, 0.0)
        self.cubic = NonlinearityModel(mu=1.0, p=3.0, tilde_form=TildeForm.POWER_LAW)

    def test_config_validation(self):
        with self.assertRaises(InvalidConfigError):
            IntegratorConfig(dt_initial=0.5, dt_max=0.25)
        with self.assertRaises(InvalidConfigError):
            IntegratorConfig(safety=1.5)
        with self.assertRaises(InvalidConfigError):
            IntegratorConfig(error_tol=0.0)

    def test_state_validation(self):
        with self.assertRaises(ValueError):
            PhysicalState(t=0.0, grid=self.grid, u=np.zeros(128), ut=np.zeros(256))
        with self.assertRaises(ValueError):
            PhysicalState(t=-1.0, grid=self.grid, u=np.zeros(256), ut=np.zeros(256))

    def test_propagator_blocks(self):
        # Identity at dt = 0 and unit determinant for every mode
        np.testing.assert_allclose(beam_propagator(self.grid, 0.0, 1.0),
                                   np.broadcast_to(np.eye(2), (129, 2, 2)), atol=1e-15)
        blocks = beam_propagator(self.grid, 0.3, 2.0)
        determinant = blocks[:, 0, 0] * blocks[:, 1, 1] - blocks[:, 0, 1] * blocks[:, 1, 0]
        np.testing.assert_allclose(determinant, 1.0, atol=1e-9)
        with self.assertRaises(ValueError):
            beam_propagator(self.grid, -0.1)

    def test_free_beam_mode_is_exact(self):
        # u = cos(omega t) sin(kx) with omega^2 = k^4 + k^2
        grid = Grid(np.pi, 32)
        x = grid.points
        initial = PhysicalState(t=0.0, grid=grid, u=np.sin(2 * x), ut=np.zeros(32))
        config = IntegratorConfig(dt_initial=0.1, dt_max=0.1, adaptive=False)
        final = BeamIntegrator(pure_beam_model(), NonlinearityModel(), config).integrate(
            initial, 1.0).final_state
        omega = math.sqrt(16.0 + 4.0)
        np.testing.assert_allclose(final.u, math.cos(omega) * np.sin(2 * x), atol=1e-12)
        self.assertAlmostEqual(final.t, 1.0, places=12)

    def test_pure_beam_conserves_energy(self):
        initial = PhysicalState(t=0.0, grid=self.grid, u=np.exp(-0.25 * self.x ** 2),
                                ut=np.zeros(256))
        trajectory = BeamIntegrator(pure_beam_model(), NonlinearityModel()).integrate(initial, 10.0)
        start = beam_energy(initial)
        drift = abs(beam_energy(trajectory.final_state) - start) / start
        self.assertLess(drift, 1e-8)

    def test_fixed_step_order(self):
        # Second order: halving dt divides the error by about four
        u0 = 0.1 * np.exp(-0.25 * self.x ** 2) * (
            1.0 + 0.3 * np.cos(0.5 * self.x) * np.exp(-0.125 * self.x ** 2))
        initial = PhysicalState(t=0.0, grid=self.grid, u=u0, ut=np.zeros(256))

        def solve(dt):
            config = IntegratorConfig(dt_initial=dt, dt_max=dt, adaptive=False)
            return BeamIntegrator(self.damped, self.cubic, config).integrate(initial, 1.0).final_state

        reference = solve(0.05 / 8)
        coarse = l2_norm(self.grid, solve(0.05).u - reference.u)
        fine = l2_norm(self.grid, solve(0.025).u - reference.u)
        self.assertGreater(math.log2(coarse / fine), 1.9)

    def test_snapshots_land_on_requested_times(self):
        initial = PhysicalState(t=0.0, grid=self.grid, u=np.exp(-self.x ** 2), ut=np.zeros(256))
        seen = []
        trajectory = BeamIntegrator(self.damped, NonlinearityModel()).integrate(
            initial, 1.0, snapshot_times=[0.0, 0.3, 0.7, 1.0], on_snapshot=lambda s: seen.append(s.t))
        np.testing.assert_allclose(trajectory.times, [0.0, 0.3, 0.7, 1.0], atol=1e-12)
        self.assertEqual(len(seen), 4)
        self.assertGreater(trajectory.accepted_steps, 0)
        self.assertLessEqual(trajectory.min_dt, trajectory.max_dt)

    def test_snapshot_time_validation(self):
        initial = PhysicalState(t=0.0, grid=self.grid, u=np.zeros(256), ut=np.zeros(256))
        integrator = BeamIntegrator(self.damped, NonlinearityModel())
        with self.assertRaises(InvalidConfigError):
            integrator.integrate(initial, 1.0, snapshot_times=[0.5, 0.2])
        with self.assertRaises(InvalidConfigError):
            integrator.integrate(initial, 1.0, snapshot_times=[0.5, 2.0])
        with self.assertRaises(InvalidConfigError):
            integrator.integrate(initial, -1.0)

    def test_blowup_detected(self):
        # Large data under a cubic flux overflows within the first steps
        initial = PhysicalState(t=0.0, grid=self.grid, u=1e3 * np.exp(-self.x ** 2),
                                ut=np.zeros(256))
        config = IntegratorConfig(dt_initial=0.1, dt_max=0.1, adaptive=False)
        with self.assertRaises(BlowUpDetectedError) as context:
            BeamIntegrator(self.damped, self.cubic, config).integrate(initial, 10.0)
        self.assertEqual(context.exception.exit_code, 3)

    def test_forcing_and_step(self):
        grid = Grid(np.pi, 32)
        x = grid.points
        state = PhysicalState(t=0.0, grid=grid, u=np.sin(2 * x), ut=np.zeros(32))
        first, second = forcing(state, self.damped, NonlinearityModel())
        np.testing.assert_array_equal(first, np.zeros(32))
        np.testing.assert_allclose(second, -4 * np.sin(2 * x), atol=1e-12)

        advanced = step(state, 0.01, self.damped, NonlinearityModel())
        self.assertAlmostEqual(advanced.t, 0.01)
        with self.assertRaises(ValueError):
            step(state, 0.0, self.damped, NonlinearityModel())

    def test_mass_law(self):
        # With a = b = 1 and u1 = e^{-x^2}: M_t = sqrt(pi) e^{-t} and M'' + M' = 0
        initial = PhysicalState(t=0.0, grid=self.grid, u=np.zeros(256), ut=np.exp(-self.x ** 2))
        times = np.linspace(0.0, 2.0, 41)
        trajectory = BeamIntegrator(self.damped, NonlinearityModel()).integrate(
            initial, 2.0, snapshot_times=times)
        frame = mass_law_residual(trajectory.snapshots, self.damped)
        self.assertEqual(len(frame), 39)
        np.testing.assert_allclose(frame["M_t"], np.sqrt(np.pi) * np.exp(-frame["t"]), rtol=1e-6)
        self.assertLess(float(frame["residual"].abs().max()), 2e-3)


if __name__ == '__main__':
    unittest.main()
