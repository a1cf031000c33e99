from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import FilterDivergedError, ParameterError, UsageError


@dataclass(frozen=True)
class FilterParams:
    mu: float
    gamma: float
    epsilon: float

    def __post_init__(self):
        # mu == 0 is accepted as the degenerate frozen filter.
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise ParameterError(f"mu must be >= 0, got {self.mu}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class FilterState:
    weights: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise UsageError("filter length must be >= 1")
        if not np.all(np.isfinite(w)):
            raise FilterDivergedError(self.iteration)
        if self.iteration < 0:
            raise UsageError(f"iteration must be >= 0, got {self.iteration}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls, length: int) -> "FilterState":
        return cls(np.zeros(int(length)))

    @property
    def length(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True, eq=False)
class Sample:
    noisy_input: np.ndarray
    noisy_desired: float

    def __post_init__(self):
        x = np.array(self.noisy_input, dtype=float).ravel()
        x.setflags(write=False)
        object.__setattr__(self, "noisy_input", x)
        object.__setattr__(self, "noisy_desired", float(self.noisy_desired))


@dataclass(frozen=True, eq=False)
class AugmentedWeight:
    """[sqrt(eps), -w] together with its cached squared norm eps + |w|^2."""

    vector: np.ndarray
    norm_sq: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)


def row_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise dot product of two (R, L) arrays.

    Accumulated column by column so the value of a row never depends on how
    many other rows share the call.
    """

    acc = a[..., 0] * b[..., 0]
    for j in range(1, a.shape[-1]):
        acc = acc + a[..., j] * b[..., j]
    return acc


def augmented_weight(weights, epsilon: float) -> AugmentedWeight:
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    w = np.asarray(weights, dtype=float).ravel()
    if not np.all(np.isfinite(w)):
        raise ParameterError("weights must be finite")
    vector = np.concatenate(([math.sqrt(epsilon)], -w))
    vector.setflags(write=False)
    return AugmentedWeight(vector=vector, norm_sq=float(epsilon + np.dot(w, w)))


def prediction_error(sample: Sample, state: FilterState) -> float:
    if sample.noisy_input.size != state.length:
        raise UsageError(
            f"input length {sample.noisy_input.size} does not match filter length {state.length}"
        )
    return float(sample.noisy_desired - np.dot(state.weights, sample.noisy_input))


def _sech_sq(h):
    # sech^2(h) = 4 a / (1 + a)^2 with a = exp(-2|h|); never overflows.
    a = np.exp(-2.0 * np.abs(h))
    return 4.0 * a / ((1.0 + a) * (1.0 + a))


def kernel_psi(e, norm_sq, gamma: float):
    """psi = 1 / (2 gamma [cosh(eta) + 1]), eta = e / (gamma |w_bar|).

    Uses cosh(eta) + 1 = 2 cosh^2(eta / 2). Broadcasts over arrays.
    """

    h = np.asarray(e, dtype=float) / (2.0 * gamma * np.sqrt(norm_sq))
    return _sech_sq(h) / (4.0 * gamma)


def kernel_shape(e, norm_sq, gamma: float):
    """sinh(eta) / (2 gamma^2 |w_bar|^2 [cosh(eta) + 1]^2 (1 + psi^2)).

    sinh(eta) / [cosh(eta) + 1]^2 == tanh(h) sech^2(h) / 2 with h = eta / 2,
    which stays finite for any finite residual.
    """

    h = np.asarray(e, dtype=float) / (2.0 * gamma * np.sqrt(norm_sq))
    s2 = _sech_sq(h)
    psi = s2 / (4.0 * gamma)
    return np.tanh(h) * s2 / (4.0 * gamma * gamma * norm_sq * (1.0 + psi * psi))


def psi(e: float, aug: AugmentedWeight, gamma: float) -> float:
    _check_gamma(gamma)
    return float(kernel_psi(e, aug.norm_sq, gamma))


def instantaneous_cost(e: float, aug: AugmentedWeight, gamma: float) -> float:
    _check_gamma(gamma)
    return float(np.arctan(kernel_psi(e, aug.norm_sq, gamma)))


def kernel_cost(e: float, aug: AugmentedWeight, gamma: float) -> float:
    """The bare logistic kernel psi, i.e. the cost without the arctangent."""

    return psi(e, aug, gamma)


def shape_factor(e: float, aug: AugmentedWeight, gamma: float) -> float:
    _check_gamma(gamma)
    return float(kernel_shape(e, aug.norm_sq, gamma))


def instantaneous_gradient(sample: Sample, state: FilterState, params: FilterParams) -> np.ndarray:
    e = prediction_error(sample, state)
    aug = augmented_weight(state.weights, params.epsilon)
    n = aug.norm
    s = kernel_shape(e, aug.norm_sq, params.gamma)
    return s * (n * sample.noisy_input + (e / n) * state.weights)


def tacldm_update(sample: Sample, state: FilterState, params: FilterParams) -> FilterState:
    """One gradient-ascent step w <- w + mu * g_hat. The input state is left untouched."""

    grad = instantaneous_gradient(sample, state, params)
    new_weights = state.weights + params.mu * grad
    if not np.all(np.isfinite(new_weights)):
        raise FilterDivergedError(state.iteration + 1)
    return FilterState(new_weights, state.iteration + 1)


def run_filter(
    samples: Iterable[Sample],
    params: FilterParams,
    initial: Optional[FilterState] = None,
    length: Optional[int] = None,
) -> FilterState:
    """Apply tacldm_update over the samples, starting from w(0) = 0 unless an initial state is given."""

    state = initial
    for sample in samples:
        if state is None:
            state = FilterState.zeros(length or sample.noisy_input.size)
        state = tacldm_update(sample, state, params)
    if state is None:
        if length is None:
            raise UsageError("no samples and no filter length given")
        state = FilterState.zeros(length)
    return state


def tacldm_batch_step(weights: np.ndarray, inputs: np.ndarray, desired: np.ndarray, params: FilterParams):
    """Advance R independent filters by one sample.

    weights and inputs are (R, L), desired is (R,). Returns (new_weights, errors).
    """

    e = desired - row_dot(weights, inputs)
    norm_sq = params.epsilon + row_dot(weights, weights)
    n = np.sqrt(norm_sq)
    s = kernel_shape(e, norm_sq, params.gamma)
    step = (params.mu * s)[:, None] * (n[:, None] * inputs + (e / n)[:, None] * weights)
    return weights + step, e


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
