import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from filterlab.analysis import aggregate_runs, iterations_to, nmsd, to_db, window_db
from filterlab.errors import UsageError


class TestNmsd(unittest.TestCase):
    def test_examples(self):
        wo = np.array([-0.6, 0.8])
        self.assertAlmostEqual(nmsd(np.zeros(2), wo), 0.0, places=12)
        self.assertAlmostEqual(nmsd(2.0 * wo, wo), 0.0, places=12)
        self.assertAlmostEqual(nmsd(wo + np.array([0.1, 0.0]), wo), -20.0, places=10)

    def test_exact_match_is_minus_infinity(self):
        wo = np.array([1.0, 2.0])
        value = nmsd(wo.copy(), wo)
        self.assertEqual(value, -math.inf)
        self.assertFalse(math.isnan(value))

    def test_zero_reference(self):
        with self.assertRaises(UsageError):
            nmsd(np.ones(2), np.zeros(2))

    def test_to_db(self):
        self.assertEqual(to_db(0.0), -math.inf)
        assert_allclose(to_db(np.array([1.0, 0.1])), [0.0, -10.0])


class TestAggregate(unittest.TestCase):
    def test_average_in_linear_domain(self):
        per_run = np.array([[1.0, 0.1, 0.01], [1.0, 0.3, 0.03]])
        r = aggregate_runs("a", per_run, np.array([False, False]), steady_window=2)
        assert_allclose(r.nmsd_db, to_db(np.array([1.0, 0.2, 0.02])))
        self.assertAlmostEqual(r.steady_state_db, to_db(0.11), places=12)
        self.assertEqual((r.diverged_runs, r.n_runs, r.surviving_runs), (0, 2, 2))
        self.assertFalse(r.flagged)
        self.assertAlmostEqual(r.steady_state_linear, 0.11, places=12)

    def test_diverged_runs_excluded_and_flagged(self):
        per_run = np.vstack([np.full((8, 4), 0.1), np.full((2, 4), np.nan)])
        diverged = np.array([False] * 8 + [True] * 2)
        r = aggregate_runs("a", per_run, diverged, 2, [(8, 3), (9, 1)])
        assert_allclose(r.nmsd_db, np.full(4, -10.0))
        self.assertEqual(r.diverged_runs, 2)
        self.assertTrue(r.flagged)
        self.assertEqual(r.divergence_iterations, ((8, 3), (9, 1)))

    def test_ten_percent_not_flagged(self):
        per_run = np.full((10, 3), 0.5)
        diverged = np.zeros(10, dtype=bool)
        diverged[0] = True
        self.assertFalse(aggregate_runs("a", per_run, diverged, 1).flagged)

    def test_all_diverged(self):
        r = aggregate_runs("a", np.full((3, 5), np.nan), np.ones(3, dtype=bool), 2)
        self.assertTrue(np.all(np.isnan(r.nmsd_db)))
        self.assertEqual(r.steady_state_db, math.inf)
        self.assertTrue(r.flagged)


class TestReadouts(unittest.TestCase):
    def setUp(self):
        curve = np.array([1.0, 0.5, 0.05, 0.01, 0.01, 0.02])
        self.result = aggregate_runs("a", curve[None, :], np.array([False]), 2)

    def test_window_db(self):
        self.assertAlmostEqual(window_db(self.result, 3, 5), -20.0, places=10)
        self.assertAlmostEqual(window_db(self.result, 0, 2), to_db(0.75), places=10)
        with self.assertRaises(UsageError):
            window_db(self.result, 4, 4)

    def test_iterations_to(self):
        self.assertEqual(iterations_to(self.result, -10.0), 2)
        self.assertEqual(iterations_to(self.result, 0.0), 0)
        self.assertIsNone(iterations_to(self.result, -30.0))


if __name__ == "__main__":
    unittest.main()
