import json
import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd

from src.errors import SchemaVersionError
from src.report_writer import (
    SCHEMA_VERSION,
    check_schema_version,
    read_summary,
    read_table,
    write_json,
    write_metadata,
    write_sweep,
    write_table,
)


class TestReportWriter(unittest.TestCase):

    def setUp(self):
        # Temporary output directory
        self.out_dir = tempfile.mkdtemp()
        self.frame = pd.DataFrame({"s": [0.0, 0.1, 0.2], "E01": [1.0 / 3.0, np.pi, 1e-300]})

    def tearDown(self):
        shutil.rmtree(self.out_dir)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def test_table_round_trip(self):
        write_table(self.frame, self.path("energy.csv"))
        back = read_table(self.path("energy.csv"))
        pd.testing.assert_frame_equal(back, self.frame)
        with open(self.path("energy.csv"), encoding="utf-8") as f:
            self.assertTrue(f.readline().startswith("schema_version,s,E01"))

    def test_tables_are_deterministic(self):
        write_table(self.frame, self.path("a.csv"))
        write_table(self.frame.copy(), self.path("b.csv"))
        with open(self.path("a.csv"), "rb") as a, open(self.path("b.csv"), "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_unknown_schema_rejected(self):
        check_schema_version("1.7")
        with self.assertRaises(SchemaVersionError):
            check_schema_version("2.0")

        table = self.frame.copy()
        table.insert(0, "schema_version", "2.0")
        table.to_csv(self.path("future.csv"), index=False)
        with self.assertRaises(SchemaVersionError):
            read_table(self.path("future.csv"))
        self.frame.to_csv(self.path("bare.csv"), index=False)
        with self.assertRaises(SchemaVersionError):
            read_table(self.path("bare.csv"))

    def test_summary_json(self):
        # numpy scalars unwrap, non-finite values become null
        write_json({"slope": np.float64(-0.5), "count": np.int64(3), "lambda": None,
                    "gap": float("nan"), "checks": {"slope": np.bool_(True)}},
                   self.path("summary.json"))
        summary = read_summary(self.path("summary.json"))
        self.assertEqual(summary["schema_version"], SCHEMA_VERSION)
        self.assertEqual(summary["slope"], -0.5)
        self.assertEqual(summary["count"], 3)
        self.assertIsNone(summary["gap"])
        self.assertIs(summary["checks"]["slope"], True)

        with open(self.path("old.json"), "w", encoding="utf-8") as f:
            json.dump({"slope": 1.0}, f)
        with self.assertRaises(SchemaVersionError):
            read_summary(self.path("old.json"))

    def test_metadata_sidecar(self):
        path = write_metadata(self.out_dir, "simulate", {"alpha": 0.0})
        with open(path, encoding="utf-8") as f:
            metadata = json.load(f)
        for key in ("created", "numpy", "scipy", "pandas", "python"):
            self.assertIn(key, metadata)
        self.assertEqual(metadata["config"], {"alpha": 0.0})

    def test_write_sweep(self):
        frame = pd.DataFrame({"alpha": [0.0, -2.0], "beta": [0.0, 1.5],
                              "region": ["Omega1", "Omega5"], "slope": [-0.5, np.nan],
                              "r_squared": [0.99, np.nan], "m_star": [0.1, np.nan],
                              "status": ["pass", "error"], "note": ["", "bounded R"]})
        written = write_sweep(frame, self.out_dir, ("csv", "xlsx"))
        for name in ("sweep_map", "workbook", "summary", "metadata"):
            self.assertTrue(os.path.exists(written[name]), name)
        summary = read_summary(written["summary"])
        self.assertEqual(summary["points"], 2)
        self.assertEqual(summary["status_counts"], {"error": 1, "pass": 1})
        self.assertEqual(summary["regions"], ["Omega1", "Omega5"])
        back = read_table(written["sweep_map"])
        self.assertEqual(back["status"].tolist(), ["pass", "error"])


if __name__ == '__main__':
    unittest.main()
