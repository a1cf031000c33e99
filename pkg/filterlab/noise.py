from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Tuple, Union

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError


def gg_scale_from_variance(alpha: float, variance: float) -> float:
    """Scale beta of the density alpha / (2 beta Gamma(1/alpha)) exp(-(|v|/beta)^alpha).

    Var = beta^2 Gamma(3/alpha) / Gamma(1/alpha).
    """

    if not (math.isfinite(alpha) and alpha > 0):
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    if not (math.isfinite(variance) and variance > 0):
        raise ParameterError(f"variance must be > 0, got {variance}")
    return math.exp(0.5 * (math.log(variance) + gammaln(1.0 / alpha) - gammaln(3.0 / alpha)))


def gg_excess_kurtosis(alpha: float) -> float:
    return math.exp(gammaln(5.0 / alpha) + gammaln(1.0 / alpha) - 2.0 * gammaln(3.0 / alpha)) - 3.0


@dataclass(frozen=True)
class GGParams:
    """Zero-mean generalized Gaussian: alpha = 2 Gaussian, alpha = 1 Laplacian."""

    kind: ClassVar[str] = "generalized_gaussian"
    alpha: float
    variance: float
    beta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta", gg_scale_from_variance(self.alpha, self.variance))

    @property
    def nominal_variance(self) -> float:
        return self.variance


@dataclass(frozen=True)
class UniformNoise:
    kind: ClassVar[str] = "uniform"
    half_width: float

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ParameterError(f"half_width must be > 0, got {self.half_width}")

    @property
    def variance(self) -> float:
        return self.half_width ** 2 / 3.0

    @property
    def nominal_variance(self) -> float:
        return self.variance


@dataclass(frozen=True)
class BinaryNoise:
    kind: ClassVar[str] = "binary"
    level: float

    def __post_init__(self):
        if not (math.isfinite(self.level) and self.level > 0):
            raise ParameterError(f"level must be > 0, got {self.level}")

    @property
    def variance(self) -> float:
        return self.level ** 2

    @property
    def nominal_variance(self) -> float:
        return self.variance


@dataclass(frozen=True)
class NoNoise:
    kind: ClassVar[str] = "none"
    variance: ClassVar[float] = 0.0
    nominal_variance: ClassVar[float] = 0.0


BackgroundNoise = Union[GGParams, UniformNoise, BinaryNoise]


@dataclass(frozen=True)
class ImpulsiveMixture:
    """Background noise plus, with probability prob, a Gaussian impulse of
    standard deviation impulse_std_ratio * (background std)."""

    kind: ClassVar[str] = "impulsive_mixture"
    base: BackgroundNoise
    prob: float
    impulse_std_ratio: float = 100.0

    def __post_init__(self):
        if not isinstance(self.base, (GGParams, UniformNoise, BinaryNoise)):
            raise ParameterError("mixture base must be a generalized Gaussian, uniform or binary noise")
        if not 0.0 < self.prob < 1.0:
            raise ParameterError(f"prob must be in (0, 1), got {self.prob}")
        if not (math.isfinite(self.impulse_std_ratio) and self.impulse_std_ratio > 0):
            raise ParameterError(f"impulse_std_ratio must be > 0, got {self.impulse_std_ratio}")

    @property
    def impulse_std(self) -> float:
        return self.impulse_std_ratio * math.sqrt(self.base.variance)

    @property
    def variance(self) -> float:
        return self.base.variance * (1.0 + self.prob * self.impulse_std_ratio ** 2)

    @property
    def nominal_variance(self) -> float:
        return self.base.variance


NoiseSpec = Union[GGParams, UniformNoise, BinaryNoise, ImpulsiveMixture, NoNoise]

Shape = Union[int, Tuple[int, ...]]


def _draw_gg(params: GGParams, size: Shape, rng: np.random.Generator) -> np.ndarray:
    # beta * sign * G^(1/alpha) with G ~ Gamma(1/alpha, 1): exact, no rejection.
    g = rng.standard_gamma(1.0 / params.alpha, size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return params.beta * sign * g ** (1.0 / params.alpha)


def _draw_background(spec: BackgroundNoise, size: Shape, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, GGParams):
        return _draw_gg(spec, size, rng)
    if isinstance(spec, UniformNoise):
        return rng.uniform(-spec.half_width, spec.half_width, size)
    if isinstance(spec, BinaryNoise):
        return np.where(rng.random(size) < 0.5, -spec.level, spec.level)
    raise ParameterError(f"unsupported background noise: {spec!r}")


def sample_impulsive(spec: ImpulsiveMixture, size: Shape, rng: np.random.Generator):
    """Draw a mixture and return (values, impulse event mask)."""

    values = _draw_background(spec.base, size, rng)
    events = rng.random(size) < spec.prob
    impulses = rng.standard_normal(size) * spec.impulse_std
    return values + np.where(events, impulses, 0.0), events


def sample_noise_array(spec: NoiseSpec, size: Shape, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, NoNoise):
        return np.zeros(size)
    if isinstance(spec, ImpulsiveMixture):
        return sample_impulsive(spec, size, rng)[0]
    return _draw_background(spec, size, rng)


def sample_gg(params: GGParams, rng: np.random.Generator) -> float:
    return float(_draw_gg(params, 1, rng)[0])


def sample_noise(spec: NoiseSpec, rng: np.random.Generator) -> float:
    return float(sample_noise_array(spec, 1, rng)[0])


def sample_noise_vector(spec: NoiseSpec, length: int, rng: np.random.Generator) -> np.ndarray:
    if int(length) < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    return sample_noise_array(spec, int(length), rng)
