"""One batch interface over the three update rules.

The runner advances every algorithm through the same realizations without
knowing which rule it is driving.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple, Type

import numpy as np

from .baselines import gdtls_batch_step, lms_batch_step
from .config_loader import AlgorithmCfg
from .errors import ConfigError
from .tacldm import FilterParams, tacldm_batch_step

NotImplementedErrorMsg = "Subclasses must implement this method."


class AdaptiveFilter(ABC):
    name: str = ""

    def __init__(self, cfg: AlgorithmCfg, default_epsilon: Optional[float] = None):
        self.cfg = cfg
        self.label = cfg.label
        self.epsilon = cfg.epsilon if cfg.epsilon is not None else default_epsilon

    @abstractmethod
    def step(self, weights: np.ndarray, inputs: np.ndarray, desired: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Advance (R, L) weights by one sample; return (new_weights, errors)."""
        raise NotImplementedError(NotImplementedErrorMsg)

    def describe(self) -> Dict[str, object]:
        return {"label": self.label, "algorithm": self.name, "mu": self.cfg.mu,
                "gamma": self.cfg.gamma, "epsilon": self.epsilon}


class TacldmFilter(AdaptiveFilter):
    name = "tacldm"

    def __init__(self, cfg: AlgorithmCfg, default_epsilon: Optional[float] = None):
        super().__init__(cfg, default_epsilon)
        if self.epsilon is None:
            raise ConfigError(f"algorithms.{cfg.label}.epsilon", "required")
        self.params = FilterParams(mu=cfg.mu, gamma=cfg.gamma, epsilon=self.epsilon)

    def step(self, weights, inputs, desired):
        return tacldm_batch_step(weights, inputs, desired, self.params)


class LmsFilter(AdaptiveFilter):
    name = "lms"

    def step(self, weights, inputs, desired):
        return lms_batch_step(weights, inputs, desired, self.cfg.mu)


class GdtlsFilter(AdaptiveFilter):
    name = "gdtls"

    def __init__(self, cfg: AlgorithmCfg, default_epsilon: Optional[float] = None):
        super().__init__(cfg, default_epsilon)
        if self.epsilon is None:
            raise ConfigError(f"algorithms.{cfg.label}.epsilon", "required")
        # gamma is unused by GDTLS; any positive placeholder satisfies FilterParams.
        self.params = FilterParams(mu=cfg.mu, gamma=1.0, epsilon=self.epsilon)

    def step(self, weights, inputs, desired):
        return gdtls_batch_step(weights, inputs, desired, self.params)


FILTERS: Dict[str, Type[AdaptiveFilter]] = {
    TacldmFilter.name: TacldmFilter,
    LmsFilter.name: LmsFilter,
    GdtlsFilter.name: GdtlsFilter,
}


def build_filter(cfg: AlgorithmCfg, default_epsilon: Optional[float] = None) -> AdaptiveFilter:
    try:
        cls = FILTERS[cfg.name]
    except KeyError:
        raise ConfigError(f"algorithms.{cfg.label}.name", f"unknown algorithm {cfg.name!r}") from None
    return cls(cfg, default_epsilon)
