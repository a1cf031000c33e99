import math
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from filterlab.errors import FilterDivergedError, ParameterError, UsageError
from filterlab.tacldm import (
    FilterParams,
    FilterState,
    Sample,
    augmented_weight,
    instantaneous_cost,
    instantaneous_gradient,
    kernel_cost,
    kernel_psi,
    prediction_error,
    psi,
    run_filter,
    shape_factor,
    tacldm_batch_step,
    tacldm_update,
)


def _direct_shape(e, norm_sq, gamma):
    # sinh / (cosh + 1)^2 form, fine for moderate residuals
    n = math.sqrt(norm_sq)
    eta = e / (gamma * n)
    p = 1.0 / (2.0 * gamma * (math.cosh(eta) + 1.0))
    return math.sinh(eta) / (2.0 * gamma ** 2 * norm_sq * (math.cosh(eta) + 1.0) ** 2 * (1.0 + p * p))


def _cost_at(w, x, d, epsilon, gamma):
    e = d - float(w @ x)
    return instantaneous_cost(e, augmented_weight(w, epsilon), gamma)


class TestAugmentedWeight(unittest.TestCase):
    def test_zero_weights(self):
        aug = augmented_weight(np.zeros(2), 1.0)
        assert_array_equal(aug.vector, [1.0, 0.0, 0.0])
        self.assertEqual(aug.norm_sq, 1.0)

    def test_hand_values(self):
        aug = augmented_weight([-0.6, 0.8], 1.0)
        assert_allclose(aug.vector, [1.0, 0.6, -0.8])
        self.assertAlmostEqual(aug.norm_sq, 2.0, places=14)
        self.assertAlmostEqual(augmented_weight([3.0, 4.0], 0.25).norm_sq, 25.25, places=12)

    def test_first_entry_and_norm(self):
        aug = augmented_weight([0.3, -1.2, 2.0], 0.5)
        self.assertAlmostEqual(aug.vector[0], math.sqrt(0.5), places=15)
        self.assertAlmostEqual(aug.norm_sq, float(aug.vector @ aug.vector), places=12)

    def test_rejects_non_positive_epsilon(self):
        for eps in (0.0, -1.0, float("nan")):
            with self.assertRaises(ParameterError):
                augmented_weight([1.0], eps)


class TestPredictionError(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(prediction_error(Sample([0.3, 0.4], 1.0), FilterState.zeros(2)), 1.0)
        self.assertEqual(prediction_error(Sample([0.5, 0.5], 2.0), FilterState(np.array([1.0, 1.0]))), 1.0)
        w = np.array([0.25, -0.5])
        x = np.array([2.0, 1.0])
        self.assertEqual(prediction_error(Sample(x, float(w @ x)), FilterState(w)), 0.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(UsageError):
            prediction_error(Sample([1.0, 2.0, 3.0], 0.0), FilterState.zeros(2))


class TestKernel(unittest.TestCase):
    def setUp(self):
        self.unit = augmented_weight(np.zeros(2), 1.0)

    def test_psi_at_zero_residual(self):
        self.assertAlmostEqual(psi(0.0, self.unit, 0.25), 1.0, places=15)
        self.assertAlmostEqual(psi(0.0, self.unit, 0.5), 0.5, places=15)

    def test_psi_vanishes_for_large_residuals(self):
        for e in (1e3, -1e3, 1e300):
            self.assertLess(psi(e, self.unit, 1.0), 1e-200)

    def test_costs(self):
        self.assertAlmostEqual(instantaneous_cost(0.0, self.unit, 0.25), math.pi / 4, places=15)
        self.assertAlmostEqual(instantaneous_cost(0.0, self.unit, 1.0), math.atan(0.25), places=15)
        self.assertAlmostEqual(instantaneous_cost(1e6, self.unit, 1.0), 0.0, places=15)
        self.assertAlmostEqual(kernel_cost(0.0, self.unit, 1.0), 0.25, places=15)

    def test_cost_bounded_by_arctan_of_peak(self):
        es = np.linspace(-5, 5, 101)
        for gamma in (0.3, 1.0, 4.0):
            values = [instantaneous_cost(e, self.unit, gamma) for e in es]
            self.assertLessEqual(max(values), math.atan(1.0 / (4.0 * gamma)) + 1e-15)
            self.assertTrue(all(v > 0 for v in values))

    def test_array_kernel_broadcasts(self):
        e = np.array([[0.0, 0.5], [1.0, -2.0]])
        out = kernel_psi(e, np.array([[1.0], [2.0]]), 1.0)
        self.assertEqual(out.shape, (2, 2))
        self.assertAlmostEqual(out[0, 0], 0.25, places=15)

    def test_gamma_must_be_positive(self):
        with self.assertRaises(ParameterError):
            psi(0.0, self.unit, 0.0)


class TestShapeFactor(unittest.TestCase):
    def test_zero_residual(self):
        self.assertEqual(shape_factor(0.0, augmented_weight([1.0], 1.0), 1.0), 0.0)

    def test_odd(self):
        aug = augmented_weight([-0.6, 0.8], 1.0)
        for e in (0.1, 0.7, 3.0, 20.0):
            self.assertEqual(shape_factor(-e, aug, 1.3), -shape_factor(e, aug, 1.3))

    def test_matches_direct_formula(self):
        aug = augmented_weight([-0.6, 0.8], 1.0)
        expected = _direct_shape(0.3, 2.0, 1.0)
        self.assertLess(abs(shape_factor(0.3, aug, 1.0) - expected) / abs(expected), 1e-12)

    def test_redescending_without_overflow(self):
        unit = augmented_weight(np.zeros(1), 1.0)
        with np.errstate(over="raise", invalid="raise"):
            for e in (1e3, 1e4, 1e6, 1e8):
                value = shape_factor(e, unit, 1.0)
                self.assertTrue(math.isfinite(value))
                self.assertLess(abs(value), 1e-30)

    def test_unimodal_in_magnitude(self):
        aug = augmented_weight([0.5], 1.0)
        values = np.array([shape_factor(e, aug, 1.0) for e in np.linspace(0.0, 40.0, 4001)])
        peak = int(np.argmax(values))
        self.assertTrue(np.all(np.diff(values[: peak + 1]) >= 0))
        self.assertTrue(np.all(np.diff(values[peak:]) <= 0))


class TestGradient(unittest.TestCase):
    def test_zero_residual_gives_zero_gradient(self):
        w = np.array([0.4, -0.2, 1.0])
        x = np.array([1.0, 2.0, -0.5])
        g = instantaneous_gradient(Sample(x, float(w @ x)), FilterState(w), FilterParams(0.1, 1.0, 1.0))
        assert_array_equal(g, np.zeros(3))

    def test_matches_central_finite_difference(self):
        rng = np.random.default_rng(7)
        params = FilterParams(mu=0.1, gamma=1.0, epsilon=1.0)
        h = 1e-6
        for _ in range(1000):
            L = int(rng.integers(1, 6))
            w = rng.standard_normal(L)
            x = rng.standard_normal(L)
            d = float(rng.standard_normal())
            g = instantaneous_gradient(Sample(x, d), FilterState(w), params)
            fd = np.empty(L)
            for k in range(L):
                step = np.zeros(L)
                step[k] = h
                fd[k] = (_cost_at(w + step, x, d, 1.0, 1.0) - _cost_at(w - step, x, d, 1.0, 1.0)) / (2 * h)
            self.assertLessEqual(np.linalg.norm(g - fd), 1e-5 * np.linalg.norm(g) + 1e-9)

    def test_outlier_barely_moves_the_gradient(self):
        x = np.array([0.8, -1.1, 0.3])
        w = np.array([0.2, 0.1, -0.4])
        d = float(w @ x) + 1e3
        g = instantaneous_gradient(Sample(x, d), FilterState(w), FilterParams(0.1, 1.0, 1.0))
        self.assertLess(np.linalg.norm(g), 1e-10 * np.linalg.norm(x))

    def test_dimension_mismatch(self):
        with self.assertRaises(UsageError):
            instantaneous_gradient(Sample([1.0], 0.0), FilterState.zeros(2), FilterParams(0.1, 1.0, 1.0))


class TestUpdate(unittest.TestCase):
    def setUp(self):
        self.x = np.array([0.9, -0.4])
        self.params = FilterParams(mu=0.1, gamma=1.0, epsilon=1.0)

    def test_zero_residual_leaves_weights(self):
        w = np.array([0.3, 0.7])
        new = tacldm_update(Sample(self.x, float(w @ self.x)), FilterState(w), self.params)
        assert_array_equal(new.weights, w)
        self.assertEqual(new.iteration, 1)

    def test_zero_step_leaves_weights(self):
        w = np.array([0.3, 0.7])
        new = tacldm_update(Sample(self.x, 5.0), FilterState(w, 4), FilterParams(0.0, 1.0, 1.0))
        assert_array_equal(new.weights, w)
        self.assertEqual(new.iteration, 5)

    def test_first_update_is_mu_times_gradient(self):
        sample = Sample(self.x, 1.5)
        state = FilterState.zeros(2)
        new = tacldm_update(sample, state, self.params)
        assert_allclose(new.weights, 0.1 * instantaneous_gradient(sample, state, self.params), rtol=0, atol=1e-17)

    def test_input_state_untouched(self):
        state = FilterState(np.array([0.1, 0.2]))
        tacldm_update(Sample(self.x, 3.0), state, self.params)
        assert_array_equal(state.weights, [0.1, 0.2])
        with self.assertRaises(ValueError):
            state.weights[0] = 1.0

    def test_non_finite_update_raises_with_iteration(self):
        with self.assertRaises(FilterDivergedError) as ctx:
            tacldm_update(Sample([1e3], 1.0), FilterState.zeros(1, ), FilterParams(1e308, 1.0, 1.0))
        self.assertEqual(ctx.exception.iteration, 1)

    def test_invalid_params(self):
        for mu, gamma, eps in ((-0.1, 1.0, 1.0), (0.1, 0.0, 1.0), (0.1, 1.0, 0.0), (float("inf"), 1.0, 1.0)):
            with self.assertRaises(ParameterError):
                FilterParams(mu, gamma, eps)

    def test_non_finite_state_rejected(self):
        with self.assertRaises(FilterDivergedError):
            FilterState(np.array([0.0, float("nan")]))

    def test_batch_step_matches_single_updates(self):
        rng = np.random.default_rng(3)
        params = FilterParams(mu=0.7, gamma=1.2, epsilon=0.8)
        W = rng.standard_normal((5, 4))
        X = rng.standard_normal((5, 4))
        d = rng.standard_normal(5)
        new, e = tacldm_batch_step(W, X, d, params)
        for r in range(5):
            single = tacldm_update(Sample(X[r], d[r]), FilterState(W[r]), params)
            assert_allclose(new[r], single.weights, rtol=1e-12, atol=1e-15)
            self.assertAlmostEqual(e[r], d[r] - float(W[r] @ X[r]), places=12)


class TestRunFilter(unittest.TestCase):
    def test_empty_sequence(self):
        state = run_filter([], FilterParams(0.1, 1.0, 1.0), length=3)
        assert_array_equal(state.weights, np.zeros(3))
        with self.assertRaises(UsageError):
            run_filter([], FilterParams(0.1, 1.0, 1.0))

    def test_noiseless_identification(self):
        rng = np.random.default_rng(11)
        wo = np.array([-0.6, 0.8])
        samples = [Sample(x, float(wo @ x)) for x in rng.standard_normal((2000, 2))]
        state = run_filter(samples, FilterParams(mu=1.0, gamma=1.0, epsilon=1.0))
        self.assertEqual(state.iteration, 2000)
        assert_allclose(state.weights, wo, atol=1e-6)


if __name__ == "__main__":
    unittest.main()
