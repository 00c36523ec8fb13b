import contextlib
import io
import os
import shutil
import tempfile
import unittest

from cleanup import cleanup, find_generated


class TestCleanup(unittest.TestCase):

    def setUp(self):
        # Output directory with generated results and one unrelated file
        self.out_dir = tempfile.mkdtemp()
        for name in ("energy.csv", "summary.json", "results.xlsx", "simulate_debug.txt", "notes.md"):
            with open(os.path.join(self.out_dir, name), "w", encoding="utf-8") as f:
                f.write("x\n")

    def tearDown(self):
        shutil.rmtree(self.out_dir)

    def test_find_generated(self):
        names = [os.path.basename(path) for path in find_generated(self.out_dir)]
        self.assertEqual(names, ["energy.csv", "results.xlsx", "simulate_debug.txt", "summary.json"])

    def test_dry_run_keeps_files(self):
        with contextlib.redirect_stdout(io.StringIO()):
            self.assertEqual(cleanup(self.out_dir, dry_run=True), 0)
        self.assertEqual(len(os.listdir(self.out_dir)), 5)

    def test_cleanup_removes_generated_only(self):
        with contextlib.redirect_stdout(io.StringIO()):
            self.assertEqual(cleanup(self.out_dir), 4)
            self.assertEqual(cleanup(self.out_dir), 0)
        self.assertEqual(os.listdir(self.out_dir), ["notes.md"])


if __name__ == '__main__':
    unittest.main()
