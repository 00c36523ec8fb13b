import unittest

import numpy as np

from src.errors import InvalidModelError, NumericalOverflowError
from src.nonlinearity import (
    NonlinearityModel,
    TildeForm,
    n_eval,
    nonlinear_flux,
    verify_assumption_N,
)
from src.spectral_grid import Grid


class TestNonlinearity(unittest.TestCase):

    def setUp(self):
        self.grid = Grid(np.pi, 32)
        self.cubic = NonlinearityModel(mu=1.0, p=3.0, tilde_form=TildeForm.POWER_LAW)

    def test_exponent_below_three_rejected(self):
        with self.assertRaises(InvalidModelError) as context:
            NonlinearityModel(mu=0.0, p=2.5, tilde_form=TildeForm.POWER_LAW)
        self.assertIn("assumption N", str(context.exception))

    def test_callable_needs_three_functions(self):
        with self.assertRaises(InvalidModelError):
            NonlinearityModel(tilde_form=TildeForm.CALLABLE, tilde_funcs=(np.sin, np.cos))

    def test_n_eval_values(self):
        # N(z) = z^2 + |z|^2 z at z = 2
        self.assertEqual(n_eval(self.cubic, 2.0, 0), 12.0)
        self.assertEqual(n_eval(self.cubic, 2.0, 1), 16.0)
        self.assertEqual(n_eval(self.cubic, 2.0, 2), 14.0)
        self.assertEqual(n_eval(self.cubic, -2.0, 0), -4.0)

        quadratic = NonlinearityModel(mu=0.5)
        np.testing.assert_allclose(n_eval(quadratic, np.array([1.0, -2.0])), [0.5, 2.0])
        self.assertTrue(NonlinearityModel().is_zero)
        self.assertFalse(quadratic.is_zero)

    def test_assumption_N_power_law(self):
        # The power law is homogeneous, so both scales give the same ratios
        report = verify_assumption_N(self.cubic, 1000, seed=3)
        self.assertTrue(report.passed)
        self.assertFalse(report.vacuous)
        self.assertEqual(len(report.rows), 6)
        for order in (0, 1, 2):
            small = report.max_ratio(order, 1.0)
            self.assertTrue(np.isfinite(small))
            self.assertAlmostEqual(report.max_ratio(order, 10.0), small, places=9)

    def test_assumption_N_vacuous(self):
        report = verify_assumption_N(NonlinearityModel(mu=1.0), 100)
        self.assertTrue(report.passed)
        self.assertTrue(report.vacuous)
        with self.assertRaises(KeyError):
            report.max_ratio(3, 1.0)

    def test_assumption_N_detects_fast_growth(self):
        # z^5 grows faster than order 3 allows
        quintic = NonlinearityModel(p=3.0, tilde_form=TildeForm.CALLABLE, tilde_funcs=(
            lambda z: z ** 5, lambda z: 5 * z ** 4, lambda z: 20 * z ** 3))
        self.assertFalse(verify_assumption_N(quintic, 500).passed)

    def test_quadratic_flux(self):
        # d/dx sin(x)^2 = sin(2x)
        x = self.grid.points
        flux = nonlinear_flux(NonlinearityModel(mu=1.0), np.sin(x), self.grid)
        np.testing.assert_allclose(flux, np.sin(2 * x), atol=1e-12)

    def test_quadratic_flux_homogeneity(self):
        x = self.grid.points
        model = NonlinearityModel(mu=0.7)
        ux = 0.3 * np.cos(x) + 0.1 * np.sin(2 * x)
        np.testing.assert_allclose(nonlinear_flux(model, 2 * ux, self.grid),
                                   4 * nonlinear_flux(model, ux, self.grid), atol=1e-12)

    def test_zero_model_flux(self):
        flux = nonlinear_flux(NonlinearityModel(), np.sin(self.grid.points), self.grid)
        np.testing.assert_array_equal(flux, np.zeros(32))

    def test_flux_input_checks(self):
        bad = np.sin(self.grid.points)
        bad[3] = np.inf
        with self.assertRaises(NumericalOverflowError):
            nonlinear_flux(self.cubic, bad, self.grid)
        with self.assertRaises(ValueError):
            nonlinear_flux(self.cubic, np.zeros(16), self.grid)


if __name__ == '__main__':
    unittest.main()
