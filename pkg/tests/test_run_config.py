import os
import tempfile
import unittest

import numpy as np

from src.errors import InvalidConfigError, InvalidModelError
from src.run_config import (
    RunConfig,
    data_size,
    initial_data,
    load_run_config,
    parse_run_config,
    x_grid,
)
from src.spectral_grid import Grid, quadrature


class TestRunConfig(unittest.TestCase):

    def setUp(self):
        # Temporary config file
        self.temp_env = tempfile.NamedTemporaryFile(mode="w", suffix=".env", delete=False)
        self.temp_env.write("# linear run\nalpha=1\nbeta=-0.5\nfit_window=1:4\n"
                            "formats=csv,xlsx\nadaptive=false\nn=256\n")
        self.temp_env.close()

    def tearDown(self):
        os.unlink(self.temp_env.name)

    def test_defaults(self):
        config = load_run_config()
        self.assertEqual(config.alpha, 0.0)
        self.assertEqual(config.fit_window, (2.0, 6.0))
        self.assertEqual(config.formats, ("csv",))
        self.assertEqual(config.y_grid(), Grid(20.0, 512))
        self.assertTrue(config.nonlinearity_model().is_zero)

    def test_load_file(self):
        config = load_run_config(self.temp_env.name)
        self.assertEqual(config.alpha, 1.0)
        self.assertEqual(config.beta, -0.5)
        self.assertEqual(config.fit_window, (1.0, 4.0))
        self.assertEqual(config.formats, ("csv", "xlsx"))
        self.assertFalse(config.adaptive)
        self.assertEqual(config.n, 256)
        self.assertEqual(config.coefficient_model().gamma, 2.5)

    def test_missing_file(self):
        with self.assertRaises(InvalidConfigError):
            load_run_config(self.temp_env.name + ".missing")

    def test_unknown_key(self):
        with self.assertRaises(InvalidConfigError) as context:
            parse_run_config({"alpha": "0", "gamma": "1"})
        self.assertIn("gamma", str(context.exception))
        with self.assertRaises(InvalidConfigError):
            RunConfig().with_overrides(gamma=1.0)

    def test_unparsable_values(self):
        for key, text in (("alpha", "abc"), ("n", "12.5"), ("adaptive", "maybe"),
                          ("fit_window", "2"), ("mu", "")):
            with self.subTest(key=key):
                with self.assertRaises(InvalidConfigError):
                    parse_run_config({key: text})

    def test_range_checks(self):
        with self.assertRaises(InvalidModelError):
            parse_run_config({"p": "2.5", "tilde_form": "power_law"})
        with self.assertRaises(InvalidConfigError):
            RunConfig(fit_window=(4.0, 2.0))
        with self.assertRaises(InvalidConfigError):
            RunConfig(n=500)
        with self.assertRaises(InvalidConfigError):
            RunConfig(family="user_supplied")
        with self.assertRaises(InvalidConfigError):
            RunConfig(formats=("pdf",))
        with self.assertRaises(InvalidConfigError):
            RunConfig(c0=-1.0)

    def test_to_dict(self):
        values = RunConfig().to_dict()
        self.assertEqual(values["fit_window"], [2.0, 6.0])
        self.assertEqual(values["formats"], ["csv"])
        self.assertEqual(values["L"], 20.0)

    def test_x_grid(self):
        # Half width L sqrt(R+1) margin, spacing at most dx
        config = RunConfig(L=10.0, n=64, dx=0.5, domain_margin=1.0)
        grid = x_grid(config, 3.0)
        self.assertAlmostEqual(grid.half_width, 20.0)
        self.assertEqual(grid.n, 128)
        self.assertLessEqual(grid.spacing, 0.5)

    def test_initial_data(self):
        # The bump is scaled to epsilon in H^{2,1} + H^{3,0}
        grid = Grid(20.0, 512)
        u0, u1 = initial_data(RunConfig(epsilon=0.1), grid)
        self.assertAlmostEqual(data_size(grid, u0, u1), 0.1, places=12)
        np.testing.assert_array_equal(u1, np.zeros(512))

        u0, u1 = initial_data(RunConfig(epsilon=0.1, data_variant="bump_velocity"), grid)
        amplitude = u0[256] / 1.3
        self.assertAlmostEqual(float(quadrature(grid, u1)), -amplitude * np.sqrt(np.pi), places=10)

        first, _ = initial_data(RunConfig(data_variant="random", seed=4), grid)
        second, _ = initial_data(RunConfig(data_variant="random", seed=4), grid)
        np.testing.assert_array_equal(first, second)

    def test_data_size_closed_form(self):
        # u1 = -c e^{-x^2/4}: weights (1+|x|)^m, H^{0,1} plus H^{1,0}
        grid = Grid(20.0, 512)
        x = grid.points
        c = 0.025
        u1 = -c * np.exp(-0.25 * x * x)
        root = (2.0 * np.pi) ** 0.25
        expected = c * (np.sqrt(2.0 * np.sqrt(2.0 * np.pi) + 4.0) + 1.5 * root)
        # the |x| kink at the origin limits the sum to about five digits
        self.assertAlmostEqual(data_size(grid, np.zeros(512), u1), expected, delta=3e-5)


if __name__ == '__main__':
    unittest.main()
