"""Errors-in-variables data generation.

x_bar = x + u,  d_bar = w_o^T x + v, with an optional sign flip of w_o
(tracking scenario). Every run draws from its own numpy Generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from .config_loader import ScenarioConfig
from .errors import UsageError
from .noise import sample_noise_array
from .tacldm import Sample, row_dot


@dataclass(frozen=True, eq=False)
class EivRealization:
    clean_inputs: np.ndarray   # (N, L)
    clean_desired: np.ndarray  # (N,)
    noisy_inputs: np.ndarray   # (N, L)
    noisy_desired: np.ndarray  # (N,)
    true_weights: np.ndarray   # (L,)
    flip_at: Optional[int] = None

    def __len__(self) -> int:
        return int(self.noisy_desired.size)

    def true_weights_at(self, tau: int) -> np.ndarray:
        if self.flip_at is not None and tau >= self.flip_at:
            return -self.true_weights
        return self.true_weights

    def samples(self) -> Iterator[Tuple[Sample, Tuple[np.ndarray, float]]]:
        for tau in range(len(self)):
            yield (
                Sample(self.noisy_inputs[tau], self.noisy_desired[tau]),
                (self.clean_inputs[tau], float(self.clean_desired[tau])),
            )


def run_seed(base_seed: int, run_index: int) -> int:
    return int(base_seed) ^ int(run_index)


def run_rng(base_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng(run_seed(base_seed, run_index))


def resolve_true_weights(config: ScenarioConfig) -> np.ndarray:
    """Configured w_o, or a unit-norm Gaussian draw from system.weights_seed."""

    if config.true_weights is not None:
        return np.asarray(config.true_weights, dtype=float)
    w = np.random.default_rng(config.weights_seed).standard_normal(config.filter_length)
    return w / np.linalg.norm(w)


def signal_regressors(signal: np.ndarray, length: int, n_samples: int) -> np.ndarray:
    """Tapped-delay windows: row tau is [s(tau+L-1), ..., s(tau)]."""

    s = np.asarray(signal, dtype=float).ravel()
    if s.size < n_samples + length:
        raise UsageError(f"signal has {s.size} samples, need at least n_samples + L = {n_samples + length}")
    windows = np.lib.stride_tricks.sliding_window_view(s[: n_samples + length - 1], length)
    return np.ascontiguousarray(windows[:, ::-1])


def eiv_generate(
    true_weights: np.ndarray,
    config: ScenarioConfig,
    rng: np.random.Generator,
    clean_inputs: Optional[np.ndarray] = None,
) -> EivRealization:
    """One realization of the EIV model.

    Draw order is fixed (x, then u, then v) so the noisy desired signal before
    the flip does not depend on whether a flip is configured.
    """

    N, L = config.n_samples, config.filter_length
    w = np.asarray(true_weights, dtype=float).ravel()
    if w.size != L:
        raise UsageError(f"true weights have {w.size} entries, filter length is {L}")
    if clean_inputs is None:
        x = rng.standard_normal((N, L)) * np.sqrt(config.input.variance)
    else:
        x = np.asarray(clean_inputs, dtype=float)
        if x.shape != (N, L):
            raise UsageError(f"clean inputs must be {(N, L)}, got {x.shape}")
    u = sample_noise_array(config.input_noise, (N, L), rng)
    v = sample_noise_array(config.output_noise, N, rng)

    d = row_dot(x, np.broadcast_to(w, x.shape))
    if config.tracking_flip_at is not None:
        d = np.where(np.arange(N) >= config.tracking_flip_at, -d, d)
    return EivRealization(
        clean_inputs=x,
        clean_desired=d,
        noisy_inputs=x + u,
        noisy_desired=d + v,
        true_weights=w,
        flip_at=config.tracking_flip_at,
    )
