import math
import os
import tempfile
import unittest

import numpy as np

from src.energy import IDENTITY_NAMES
from src.errors import InsufficientDataError
from src.pipeline import SimulationPipeline
from src.run_config import RunConfig

# Nine snapshots on s in [0, 0.4]: enough for every table, cheap to run
QUICK = dict(L=15.0, n=128, dx=0.5, s_max=0.4, snapshots_per_unit_s=20, fit_window=(0.0, 0.4))


class TestPipeline(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.result = SimulationPipeline(RunConfig(**QUICK)).run()

    def test_table_shapes(self):
        result = self.result
        self.assertEqual(len(result.scaled_states), 9)
        self.assertEqual(len(result.energy), 9)
        self.assertEqual(len(result.identities), 7)
        self.assertEqual(list(result.identities.columns), ["s"] + list(IDENTITY_NAMES))
        self.assertEqual(len(result.mass), 7)
        self.assertEqual(len(result.scaled_residuals), 7)
        # stride 10 keeps the first snapshot and the last one
        self.assertEqual(len(result.snapshots), 2 * 128)
        self.assertEqual(sorted(result.snapshots["s"].unique())[-1], result.scaled_states[-1].s)

    def test_profile_table(self):
        profile = self.result.profile_error
        self.assertTrue(math.isnan(profile["err_raw"].iloc[0]))
        self.assertFalse(profile["err_raw"].iloc[1:].isna().any())
        self.assertTrue((profile["err_shift"] > 0).all())
        np.testing.assert_allclose(profile["R"], np.expm1(profile["s"]))

    def test_summary(self):
        summary = self.result.summary
        self.assertEqual(summary["region"], "Omega1")
        self.assertFalse(summary["exploratory"])
        self.assertEqual(summary["snapshot_count"], 9)
        self.assertAlmostEqual(summary["s_end"], 0.4)
        self.assertAlmostEqual(summary["t_end"], math.expm1(0.4))
        self.assertAlmostEqual(summary["lambda"], 0.45)
        self.assertAlmostEqual(summary["predicted_slope"], -0.475)
        self.assertEqual(summary["fit_samples"], 9)
        self.assertTrue(summary["checks"]["zero_mean"])
        self.assertGreater(summary["accepted_steps"], 0)
        # zero velocity: the data size is the configured bump size
        self.assertAlmostEqual(summary["data_size"], RunConfig().epsilon, places=10)
        # zero initial velocity keeps the linear mass constant
        self.assertAlmostEqual(summary["m_star"], self.result.scaled_states[0].m, places=3)

    def test_exploratory_flag(self):
        result = SimulationPipeline(RunConfig(**QUICK)).run(exploratory=True)
        self.assertTrue(result.summary["exploratory"])
        self.assertFalse(result.summary["passed"])

    def test_debug_file_header(self):
        # The header lists the run settings before any step is logged
        with tempfile.TemporaryDirectory() as out_dir:
            path = os.path.join(out_dir, "simulate_debug.txt")
            SimulationPipeline(RunConfig(**QUICK), debug=True, debug_file=path)
            with open(path, encoding="utf-8") as f:
                header = f.read()
        self.assertTrue(header.startswith("SimulationPipeline Debug Log"))
        self.assertIn("s_max: 0.4", header)

    def test_bounded_R_has_too_few_snapshots(self):
        with self.assertRaises(InsufficientDataError):
            SimulationPipeline(RunConfig(alpha=-2.0, beta=1.5, **QUICK)).run()


if __name__ == '__main__':
    unittest.main()
