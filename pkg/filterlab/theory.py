"""Closed-form local analysis of TACLDM around the true weights.

All predictors rest on the small-noise expansion at w_o (sinh(eta) ~ eta,
cosh(eta) ~ 1, psi ~ 1/(4 gamma)), which is where the recurring factor
(1 + 1/(16 gamma^2)) comes from.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import ParameterError, StabilityBoundaryError, UsageError

logger = logging.getLogger(__name__)

MAX_DENSE_ORDER = 64  # L^2 <= 4096 for the Kronecker solve


@dataclass(frozen=True, eq=False)
class SystemSpec:
    true_weights: np.ndarray
    input_covariance: np.ndarray
    input_noise_var: float
    output_noise_var: float

    def __post_init__(self):
        w = np.array(self.true_weights, dtype=float).ravel()
        r = np.array(self.input_covariance, dtype=float)
        if r.shape != (w.size, w.size):
            raise ParameterError(f"input_covariance must be {w.size}x{w.size}, got {r.shape}")
        if not np.allclose(r, r.T, rtol=1e-12, atol=1e-12):
            raise ParameterError("input_covariance must be symmetric")
        try:
            np.linalg.cholesky(r)
        except np.linalg.LinAlgError as exc:
            raise ParameterError("input_covariance must be positive definite") from exc
        if not self.input_noise_var > 0 or not self.output_noise_var > 0:
            raise ParameterError("noise variances must be > 0")
        w.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "true_weights", w)
        object.__setattr__(self, "input_covariance", r)

    @classmethod
    def white(cls, true_weights, input_var: float, input_noise_var: float, output_noise_var: float) -> "SystemSpec":
        w = np.asarray(true_weights, dtype=float).ravel()
        return cls(w, input_var * np.eye(w.size), input_noise_var, output_noise_var)

    @property
    def length(self) -> int:
        return int(self.true_weights.size)

    def epsilon(self) -> float:
        return self.output_noise_var / self.input_noise_var

    def aug_norm_sq(self) -> float:
        return float(self.true_weights @ self.true_weights) + self.epsilon()

    def input_var(self) -> float:
        """sigma_x^2 taken as tr(R) / L."""

        return float(np.trace(self.input_covariance)) / self.length

    def bracket(self) -> np.ndarray:
        """R + sigma_i^2 I - sigma_i^2 w_o w_o^T / |w_bar_o|^2 (always positive definite)."""

        w = self.true_weights
        s2 = self.input_noise_var
        return self.input_covariance + s2 * np.eye(self.length) - s2 * np.outer(w, w) / self.aug_norm_sq()


@dataclass(frozen=True)
class StabilityBounds:
    mean_bound: float
    msq_bound: float

    @property
    def combined(self) -> float:
        return min(self.mean_bound, self.msq_bound)


@dataclass(frozen=True, eq=False)
class MsdPrediction:
    hessian: np.ndarray
    grad_noise_cov: np.ndarray
    transition: np.ndarray
    msd: float
    residual: float = 0.0
    spectral_radius: float = 0.0  # of I + mu H

    @property
    def msd_db(self) -> float:
        return 10.0 * math.log10(self.msd) if self.msd > 0 else -math.inf


def _arctan_factor(gamma: float) -> float:
    return (1.0 + 1.0 / (16.0 * gamma * gamma)) ** 2


def _check_gamma(gamma: float) -> None:
    if not (math.isfinite(gamma) and gamma > 0):
        raise ParameterError(f"gamma must be > 0, got {gamma}")


def hessian_scale(spec: SystemSpec, gamma: float) -> float:
    """Negative scalar c with H = c * bracket."""

    _check_gamma(gamma)
    num = 16.0 * gamma ** 4 + gamma ** 2 + spec.input_noise_var
    return -num / (128.0 * gamma ** 7 * spec.aug_norm_sq() * _arctan_factor(gamma))


def hessian_at_optimum(spec: SystemSpec, gamma: float) -> np.ndarray:
    return hessian_scale(spec, gamma) * spec.bracket()


def hessian_spectrum(spec: SystemSpec, gamma: float) -> np.ndarray:
    return scipy.linalg.eigh(hessian_at_optimum(spec, gamma), eigvals_only=True)


def mean_step_bound(spec: SystemSpec, gamma: float) -> float:
    # Magnitude of the leading coefficient: H is negative definite, so
    # |1 + mu * lambda| < 1 needs mu < 2 / |lambda_min(H)|.
    _check_gamma(gamma)
    lam = scipy.linalg.eigh(spec.bracket(), eigvals_only=True)[-1]
    num = 256.0 * gamma ** 7 * spec.aug_norm_sq() * _arctan_factor(gamma)
    return num / ((16.0 * gamma ** 4 + gamma ** 2 + spec.input_noise_var) * lam)


def msq_step_bound(spec: SystemSpec, gamma: float, input_var: Optional[float] = None, L: Optional[int] = None) -> float:
    _check_gamma(gamma)
    input_var = spec.input_var() if input_var is None else input_var
    L = spec.length if L is None else int(L)
    n2 = spec.aug_norm_sq()
    w2 = float(spec.true_weights @ spec.true_weights)
    den = L * input_var * n2 + spec.output_noise_var + w2 * (L - 1) * spec.input_noise_var
    return 16.0 * gamma ** 3 * n2 * n2 / den


def combined_step_bound(spec: SystemSpec, gamma: float, input_var: Optional[float] = None, L: Optional[int] = None) -> StabilityBounds:
    return StabilityBounds(
        mean_bound=mean_step_bound(spec, gamma),
        msq_bound=msq_step_bound(spec, gamma, input_var, L),
    )


def gradient_noise_covariance(spec: SystemSpec, gamma: float) -> np.ndarray:
    _check_gamma(gamma)
    scale = spec.input_noise_var / (64.0 * gamma ** 6 * spec.aug_norm_sq() * _arctan_factor(gamma))
    return scale * spec.bracket()


def steady_state_msd(spec: SystemSpec, gamma: float, mu: float) -> MsdPrediction:
    """mu^2 vec{M}^T (I - F)^{-1} vec{I} with F = (I + mu H) kron (I + mu H).

    msd is +inf when I + mu H does not contract or the solved value is not positive.
    """

    if not (math.isfinite(mu) and mu >= 0):
        raise ParameterError(f"mu must be >= 0, got {mu}")
    L = spec.length
    if L > MAX_DENSE_ORDER:
        raise UsageError(f"filter length {L} too large for the dense Kronecker solve (max {MAX_DENSE_ORDER})")

    H = hessian_at_optimum(spec, gamma)
    M = gradient_noise_covariance(spec, gamma)
    A = np.eye(L) + mu * H
    F = np.kron(A, A)
    if mu == 0:
        return MsdPrediction(hessian=H, grad_noise_cov=M, transition=F, msd=0.0, spectral_radius=1.0)

    bound = combined_step_bound(spec, gamma).combined
    if mu >= bound:
        logger.warning("mu=%g is above the combined stability bound %.6g", mu, bound)
    rho = float(np.max(np.abs(scipy.linalg.eigh(A, eigvals_only=True))))
    if rho >= 1.0:
        # the mean recursion does not contract, so no finite steady state exists
        logger.warning("mu=%g: spectral radius of I + mu H is %.6g, MSD is unbounded", mu, rho)
        return MsdPrediction(hessian=H, grad_noise_cov=M, transition=F, msd=math.inf, spectral_radius=rho)

    system = np.eye(L * L) - F
    vec_i = np.eye(L).reshape(-1, order="F")
    try:
        q = scipy.linalg.solve(system, vec_i)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise StabilityBoundaryError(f"I - F is singular at mu={mu}") from exc
    if not np.all(np.isfinite(q)):
        raise StabilityBoundaryError(f"I - F is singular at mu={mu}")

    m = M.reshape(-1, order="F")
    msd = float(mu * mu * m @ q)
    residual = float(np.linalg.norm(system @ q - vec_i))
    if not msd > 0:
        logger.warning("mu=%g: non-positive MSD solution %.6g, reporting it as unbounded", mu, msd)
        msd = math.inf
    return MsdPrediction(hessian=H, grad_noise_cov=M, transition=F, msd=msd, residual=residual, spectral_radius=rho)
