import math
import unittest

import numpy as np

from src.analysis import refinement_ratio
from src.coefficients import CoefficientModel, scaled_factors
from src.energy import (
    IDENTITY_NAMES,
    EnergyWeights,
    ModeAmplitude,
    ScalarFunction,
    eval_composites,
    eval_E0,
    eval_E1,
    eval_E2,
    eval_Em,
    evaluate_report,
    general_identity_residual,
    identity_terms,
    manufactured_system,
    specialized_identity_residuals,
)
from src.errors import InvalidConfigError
from src.nonlinearity import NonlinearityModel
from src.scaling import decompose, profile_derivative, profile_phi, snapshot_schedule, to_scaled
from src.solver import BeamIntegrator, IntegratorConfig, PhysicalState
from src.spectral_grid import Grid
from src.verification import (
    DIFFERENCE_FLOOR,
    GENERAL_SPACING,
    MANUFACTURED_TOLERANCE,
    REFINEMENT_THRESHOLD,
    RESIDUAL_FLOOR,
    TRAJECTORY_TOLERANCE,
    manufactured_family,
)

ROOT_2PI = math.sqrt(2.0 * math.pi)


def linear_trajectory(per_unit_s, amplitude=0.05):
    """Scaled snapshots of a linear run with a = b = 1 on a fixed y-grid."""
    model = CoefficientModel.power_law(0.0, 0.0)
    grid = Grid(30.0, 512)
    x = grid.points
    bump = amplitude * np.exp(-0.25 * x ** 2)
    initial = PhysicalState(t=0.0, grid=grid, u=bump, ut=-0.5 * bump)
    schedule = snapshot_schedule(0.5, per_unit_s, model)
    y_grid = Grid(10.0, 256)
    states = []
    BeamIntegrator(model, NonlinearityModel(), IntegratorConfig(error_tol=1e-11)).integrate(
        initial, float(schedule["t"].iloc[-1]), snapshot_times=schedule["t"],
        on_snapshot=lambda state: states.append(to_scaled(state, model, y_grid)),
        keep_snapshots=False)
    return states


class TestEnergy(unittest.TestCase):

    def setUp(self):
        # f = phi_y, g = 0 at s = 0 with a = b = 1, so c1 = c4 = 1
        self.grid = Grid(20.0, 512)
        y = self.grid.points
        factors = scaled_factors(CoefficientModel.power_law(0.0, 0.0), 0.0)
        self.scaled = decompose(self.grid, 0.0, 0.0, profile_derivative(y, 1), np.zeros(512),
                                factors)

    def test_E0_closed_form(self):
        energies = eval_E0(self.scaled)
        self.assertAlmostEqual(energies["E01"], 7 * ROOT_2PI / (128 * math.pi), places=12)
        self.assertAlmostEqual(energies["E02"], ROOT_2PI / (8 * math.pi), places=12)

    def test_E1_closed_form(self):
        weighted = eval_E1(self.scaled, 1)
        self.assertAlmostEqual(weighted["E11_1"], 61 * ROOT_2PI / (512 * math.pi), places=12)
        plain = eval_E1(self.scaled, 0)
        self.assertAlmostEqual(plain["E12_0"], 0.5 * ROOT_2PI / (16 * math.pi), places=12)
        with self.assertRaises(ValueError):
            eval_E1(self.scaled, 2)

    def test_E2_nonnegative(self):
        energies = eval_E2(self.scaled)
        self.assertGreater(energies["E21"], 0.0)
        self.assertAlmostEqual(energies["E22"], 0.5 * 3 * ROOT_2PI / (64 * math.pi), places=12)

    def test_Em(self):
        # c1 = 1 at s = 0
        energies = eval_Em(2.0, 1.0, 0.0, CoefficientModel.power_law(0.0, 0.0))
        self.assertAlmostEqual(energies["Em1"], 0.5)
        self.assertAlmostEqual(energies["Em2"], 4.0)
        same = eval_Em(2.0, 1.0, 0.0, factors=self.scaled.factors)
        self.assertEqual(same, energies)
        with self.assertRaises(ValueError):
            eval_Em(2.0, 1.0, 0.0)

    def test_composites_with_unit_parts(self):
        parts = {name: 1.0 for name in IDENTITY_NAMES}
        parts.update({"int_G2": 1.0, "int_g2": 1.0, "int_y2g2": 1.0, "int_gy2": 1.0})
        unit = dict(c0=1, c1_0=1, c1_1=1, c2=1, ctilde0=1, ctilde1_0=1, ctilde1_1=1)
        composites = eval_composites(parts, EnergyWeights(**unit))
        self.assertEqual(composites["calE"], 9.0)
        self.assertEqual(composites["calE_tilde"], 10.0)
        self.assertEqual(composites["calG"], 4.0)
        self.assertEqual(eval_composites(parts, unit), composites)

    def test_weights_must_be_positive(self):
        with self.assertRaises(InvalidConfigError):
            EnergyWeights(c0=0.0)
        with self.assertRaises(InvalidConfigError):
            EnergyWeights(ctilde1_1=-2.0)

    def test_evaluate_report(self):
        report = evaluate_report(self.scaled, NonlinearityModel())
        self.assertTrue(all(report.lower_bounds.values()))
        self.assertEqual(report.remainder_norms["nonlin_L2"], 0.0)
        self.assertEqual(report.remainder_norms["H_L2"], 0.0)
        self.assertTrue(report.remainder_norms["hardy_H"])
        row = report.to_row()
        for key in ("s", "calE", "calG", "lower_bound_bbE0", "E22"):
            self.assertIn(key, row)
        # calE with default weights on this state: g = 0, m = m_s = 0
        expected = (8 * (report.E01 + 4 * report.E02) + 4 * (report.E11_0 + 4 * report.E12_0)
                    + 2 * (report.E11_1 + 4 * report.E12_1) + report.E21 + 4 * report.E22)
        self.assertAlmostEqual(report.calE, expected, places=12)

    def test_identity_terms_cover_every_energy(self):
        energies, rhs = identity_terms(self.scaled, NonlinearityModel(mu=1.0))
        self.assertEqual(set(energies), set(IDENTITY_NAMES))
        self.assertEqual(set(rhs), set(IDENTITY_NAMES))
        self.assertTrue(all(np.isfinite(v) for v in rhs.values()))

    def test_general_identity_family(self):
        # Every manufactured system: small residual at ds = 1e-3, fourth-order shrinkage
        for (k, l, m, n), system in manufactured_family(self.grid):
            with self.subTest(k=k, l=l, m=m, n=n):
                coarse = general_identity_residual(system, [0.5, 1.0, 1.5], GENERAL_SPACING)
                fine = general_identity_residual(system, [0.5, 1.0, 1.5], GENERAL_SPACING / 2)
                for column in ("dE1", "dE2"):
                    worst, finest = float(coarse[column].max()), float(fine[column].max())
                    self.assertLessEqual(worst, MANUFACTURED_TOLERANCE)
                    if worst > DIFFERENCE_FLOOR:
                        self.assertGreaterEqual(worst / finest, REFINEMENT_THRESHOLD)

    def test_general_identity_difference_order(self):
        # Large spacings keep truncation far above round-off: halving ds divides by about 16
        (_, system) = manufactured_family(self.grid)[2]
        coarse = general_identity_residual(system, [1.0], 0.04)
        fine = general_identity_residual(system, [1.0], 0.02)
        for column in ("dE1", "dE2"):
            self.assertGreater(float(coarse[column].iloc[0]) / float(fine[column].iloc[0]), 8.0)

    def test_general_identity_input_checks(self):
        y = self.grid.points
        modes = [(ModeAmplitude(math.exp, math.exp, math.exp), profile_phi(y))]
        one = ScalarFunction.constant(1.0)
        with self.assertRaises(ValueError):
            manufactured_system(self.grid, 0.5, 0.0, 1.0, 2, one, one, one, one, modes)
        system = manufactured_system(self.grid, 0.5, 0.0, 1.0, 0, one, one, one, one, modes)
        with self.assertRaises(ValueError):
            general_identity_residual(system, [1.0], 0.0)

    def test_specialized_identities_along_linear_run(self):
        # Halving ds shrinks every series at least 3.7 times
        coarse = specialized_identity_residuals(linear_trajectory(100), NonlinearityModel())
        fine = specialized_identity_residuals(linear_trajectory(200), NonlinearityModel())
        self.assertEqual(list(coarse.columns), list(IDENTITY_NAMES))
        self.assertEqual(coarse.index.name, "s")
        ratios = refinement_ratio(coarse, fine)
        for name in IDENTITY_NAMES:
            with self.subTest(identity=name):
                self.assertLessEqual(float(fine[name].max()), TRAJECTORY_TOLERANCE)
                if max(float(coarse[name].max()), float(fine[name].max())) > RESIDUAL_FLOOR:
                    self.assertGreaterEqual(ratios[name], REFINEMENT_THRESHOLD)


if __name__ == '__main__':
    unittest.main()
