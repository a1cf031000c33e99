"""Reference filters: plain LMS and gradient-descent total least squares."""

from __future__ import annotations

import numpy as np

from .errors import FilterDivergedError, ParameterError
from .tacldm import (
    AugmentedWeight,
    FilterParams,
    FilterState,
    Sample,
    augmented_weight,
    prediction_error,
    row_dot,
)


def lms_update(sample: Sample, state: FilterState, mu: float) -> FilterState:
    if not mu >= 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    e = prediction_error(sample, state)
    new_weights = state.weights + mu * e * sample.noisy_input
    return _next_state(state, new_weights)


def gdtls_cost(e: float, aug: AugmentedWeight) -> float:
    """Rayleigh-quotient TLS cost e^2 / (2 |w_bar|^2)."""

    return 0.5 * e * e / aug.norm_sq


def gdtls_gradient(sample: Sample, state: FilterState, epsilon: float) -> np.ndarray:
    """Negative gradient of gdtls_cost with respect to w."""

    e = prediction_error(sample, state)
    aug = augmented_weight(state.weights, epsilon)
    return (e * sample.noisy_input + (e * e / aug.norm_sq) * state.weights) / aug.norm_sq


def gdtls_update(sample: Sample, state: FilterState, params: FilterParams) -> FilterState:
    new_weights = state.weights + params.mu * gdtls_gradient(sample, state, params.epsilon)
    return _next_state(state, new_weights)


def lms_batch_step(weights: np.ndarray, inputs: np.ndarray, desired: np.ndarray, mu: float):
    e = desired - row_dot(weights, inputs)
    return weights + (mu * e)[:, None] * inputs, e


def gdtls_batch_step(weights: np.ndarray, inputs: np.ndarray, desired: np.ndarray, params: FilterParams):
    e = desired - row_dot(weights, inputs)
    norm_sq = params.epsilon + row_dot(weights, weights)
    step = (e[:, None] * inputs + (e * e / norm_sq)[:, None] * weights) / norm_sq[:, None]
    return weights + params.mu * step, e


def _next_state(state: FilterState, new_weights: np.ndarray) -> FilterState:
    if not np.all(np.isfinite(new_weights)):
        raise FilterDivergedError(state.iteration + 1)
    return FilterState(new_weights, state.iteration + 1)
