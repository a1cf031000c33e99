from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import UsageError

DIVERGED_FLAG_FRACTION = 0.10


def to_db(linear):
    """10 log10 that maps 0 to -inf instead of warning."""

    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(linear)
    return float(out) if np.ndim(out) == 0 else out


def nmsd(weights, true_weights) -> float:
    """10 log10(|w - w_o|^2 / |w_o|^2); -inf when w == w_o exactly."""

    w = np.asarray(weights, dtype=float).ravel()
    wo = np.asarray(true_weights, dtype=float).ravel()
    ref = float(wo @ wo)
    if not ref > 0:
        raise UsageError("true weights must be non-zero")
    diff = w - wo
    return to_db(float(diff @ diff) / ref)


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    label: str
    nmsd_db: np.ndarray
    steady_state_db: float
    diverged_runs: int
    n_runs: int
    steady_window: int
    divergence_iterations: Tuple[Tuple[int, int], ...] = field(default=())

    @property
    def flagged(self) -> bool:
        return self.diverged_runs > DIVERGED_FLAG_FRACTION * self.n_runs

    @property
    def surviving_runs(self) -> int:
        return self.n_runs - self.diverged_runs

    @property
    def steady_state_linear(self) -> float:
        return 10.0 ** (self.steady_state_db / 10.0)


def aggregate_runs(
    label: str,
    per_run: np.ndarray,
    diverged: np.ndarray,
    steady_window: int,
    divergence_iterations: Sequence[Tuple[int, int]] = (),
) -> TrajectoryResult:
    """Average linear NMSD over surviving runs, then convert to dB.

    per_run is (R, N) linear NMSD in run-index order; diverged is a bool mask (R,).
    """

    keep = ~np.asarray(diverged, dtype=bool)
    n_runs, n_samples = per_run.shape
    if keep.any():
        mean_lin = np.mean(per_run[keep], axis=0)
        steady = to_db(float(np.mean(mean_lin[-steady_window:])))
        curve = to_db(mean_lin)
    else:
        curve = np.full(n_samples, np.nan)
        steady = math.inf
    return TrajectoryResult(
        label=label,
        nmsd_db=curve,
        steady_state_db=steady,
        diverged_runs=int(n_runs - keep.sum()),
        n_runs=int(n_runs),
        steady_window=int(steady_window),
        divergence_iterations=tuple(divergence_iterations),
    )


def window_db(result: TrajectoryResult, start: int, stop: Optional[int] = None) -> float:
    """dB of the mean linear NMSD over iterations [start, stop)."""

    lin = 10.0 ** (result.nmsd_db[start:stop] / 10.0)
    if lin.size == 0:
        raise UsageError(f"empty window [{start}, {stop})")
    return to_db(float(np.mean(lin)))


def iterations_to(result: TrajectoryResult, level_db: float) -> Optional[int]:
    """First iteration whose NMSD is at or below level_db, or None."""

    hits = np.flatnonzero(result.nmsd_db <= level_db)
    return int(hits[0]) if hits.size else None
