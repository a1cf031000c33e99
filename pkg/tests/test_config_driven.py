"""
Configuration-driven identification run.

Reads a scenario YAML (FILTERLAB_TEST_CONFIG, default configs/sample_quick.yaml),
runs the `identify` command into a temporary directory, checks the artifacts and
prints a divergence report when any Monte Carlo run diverged.

Usage:
  python -m unittest tests.test_config_driven -v
  python run_config_test.py --config configs/gaussian_impulsive.yaml -v
"""

import contextlib
import csv
import io
import json
import os
import tempfile
import unittest
from pathlib import Path

from filterlab.cli import EXIT_DIVERGED, EXIT_OK, main
from filterlab.config_loader import load_yaml, parse_config

CONFIG_ENV = "FILTERLAB_TEST_CONFIG"


class TestConfigDrivenIdentification(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config_path = Path(os.environ.get(CONFIG_ENV, "configs/sample_quick.yaml"))

    @staticmethod
    def _report_divergence(summary_rows) -> None:
        diverged = [r for r in summary_rows if int(r["diverged_runs"]) > 0]
        if not diverged:
            return
        print("\n" + "=" * 60)
        print("DIVERGED RUNS")
        print("=" * 60)
        for r in diverged:
            flag = "  (flagged)" if r["flagged"] == "true" else ""
            print(f"   {r['label']:<16} {r['diverged_runs']:>4} / {r['n_runs']} runs{flag}")
        print("=" * 60)

    def test_identify_from_config(self):
        if not self.config_path.exists():
            self.skipTest(f"config not found: {self.config_path}")

        cfg = parse_config(load_yaml(self.config_path))
        labels = [a.label for a in cfg.scenario.algorithms]

        with tempfile.TemporaryDirectory() as td:
            out = Path(td) / "run"
            with contextlib.redirect_stdout(io.StringIO()):
                status = main(["identify", "--config", str(self.config_path), "--out", str(out)])
            self.assertIn(status, (EXIT_OK, EXIT_DIVERGED))

            for label in labels:
                curve = out / f"{label}.csv"
                self.assertTrue(curve.exists(), f"missing curve for {label}")
                with curve.open(newline="", encoding="utf-8") as f:
                    self.assertEqual(sum(1 for _ in f), cfg.scenario.n_samples + 1)

            with (out / "summary.csv").open(newline="", encoding="utf-8") as f:
                summary = list(csv.DictReader(f))
            self.assertEqual([r["label"] for r in summary], labels)

            manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
            self.assertEqual(manifest["seed"], cfg.scenario.seed)
            self.assertIn("summary.csv", manifest["emitted_files"])

            self._report_divergence(summary)
            if status == EXIT_DIVERGED:
                self.assertTrue(any(int(r["diverged_runs"]) for r in summary))


if __name__ == "__main__":
    unittest.main()
