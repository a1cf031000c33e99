from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import AdaptiveFilter, build_filter
from .analysis import TrajectoryResult, aggregate_runs, to_db
from .config_loader import AlgorithmCfg, ScenarioConfig, SurfaceCfg
from .errors import ConfigError, UsageError
from .noise import sample_noise_array
from .sampler import eiv_generate, resolve_true_weights, run_rng, signal_regressors
from .tacldm import kernel_psi, row_dot
from .theory import SystemSpec, combined_step_bound, steady_state_msd

logger = logging.getLogger(__name__)

THREADS_ENV = "FILTERLAB_THREADS"
MAX_CHUNK_RUNS = 64


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(THREADS_ENV, f"must be >= 1, got {n}")
    return n


@dataclass(frozen=True, eq=False)
class _ChunkResult:
    runs: range
    per_run: Dict[str, np.ndarray]
    diverged_at: Dict[str, np.ndarray]
    residual: Dict[str, np.ndarray]


def _run_chunk(
    config: ScenarioConfig,
    filters: Sequence[AdaptiveFilter],
    true_weights: np.ndarray,
    runs: range,
    clean_inputs: Optional[np.ndarray],
) -> _ChunkResult:
    N, L, R = config.n_samples, config.filter_length, len(runs)
    reals = [eiv_generate(true_weights, config, run_rng(config.seed, r), clean_inputs) for r in runs]
    # (N, R, L) so every iteration reads one contiguous block
    X = np.ascontiguousarray(np.stack([r.noisy_inputs for r in reals], axis=1))
    D = np.ascontiguousarray(np.stack([r.noisy_desired for r in reals], axis=1))
    del reals

    ref = float(true_weights @ true_weights)
    flipped = -true_weights
    limit = config.blowup_norm ** 2
    if config.initial_weights is not None:
        w0 = np.broadcast_to(np.asarray(config.initial_weights, dtype=float), (R, L))
    else:
        w0 = np.zeros((R, L))

    per_run: Dict[str, np.ndarray] = {}
    diverged_at: Dict[str, np.ndarray] = {}
    residual: Dict[str, np.ndarray] = {}
    for f in filters:
        W = np.array(w0)
        lin = np.empty((R, N))
        first = np.full(R, -1)
        alive = np.ones(R, dtype=bool)
        resid = np.empty(N) if runs.start == 0 else None
        with np.errstate(over="ignore", invalid="ignore"):
            for tau in range(N):
                W, e = f.step(W, X[tau], D[tau])
                if resid is not None:
                    resid[tau] = e[0]
                sq = row_dot(W, W)
                bad = alive & ~(np.isfinite(sq) & (sq <= limit))
                if bad.any():
                    first[bad] = tau
                    alive &= ~bad
                if not alive.all():
                    W[~alive] = 0.0
                wo = flipped if config.tracking_flip_at is not None and tau >= config.tracking_flip_at else true_weights
                diff = W - wo
                lin[:, tau] = row_dot(diff, diff) / ref
        lin[~alive] = np.nan

        # A run that ends worse than the threshold has diverged too, even if
        # its weights stayed finite.
        tail = lin[:, N - config.steady_window:]
        threshold = 10.0 ** (config.divergence_threshold_db / 10.0)
        with np.errstate(invalid="ignore"):
            stalled = alive & (np.mean(tail, axis=1) > threshold)
        first[stalled] = N

        per_run[f.label] = lin
        diverged_at[f.label] = first
        if resid is not None:
            residual[f.label] = resid
    return _ChunkResult(runs=runs, per_run=per_run, diverged_at=diverged_at, residual=residual)


def _chunks(n_runs: int, workers: int) -> List[range]:
    size = max(1, min(MAX_CHUNK_RUNS, math.ceil(n_runs / workers)))
    return [range(s, min(s + size, n_runs)) for s in range(0, n_runs, size)]


def _monte_carlo(
    config: ScenarioConfig,
    true_weights: Optional[np.ndarray] = None,
    clean_inputs: Optional[np.ndarray] = None,
) -> Tuple[Dict[str, TrajectoryResult], Dict[str, np.ndarray]]:
    if true_weights is None:
        true_weights = resolve_true_weights(config)
    true_weights = np.asarray(true_weights, dtype=float).ravel()
    if not float(true_weights @ true_weights) > 0:
        raise UsageError("true weights must be non-zero")
    filters = [build_filter(a, config.default_epsilon()) for a in config.algorithms]
    workers = worker_count()
    chunks = _chunks(config.n_runs, workers)
    logger.info(
        "Monte Carlo: %d runs x %d samples, L=%d, algorithms=%s, workers=%d",
        config.n_runs, config.n_samples, config.filter_length, ",".join(f.label for f in filters), workers,
    )
    for f in filters:
        logger.debug("filter %s", f.describe())

    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(config, filters, true_weights, c, clean_inputs) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _run_chunk(config, filters, true_weights, c, clean_inputs), chunks))
    parts.sort(key=lambda p: p.runs.start)

    results: Dict[str, TrajectoryResult] = {}
    residuals: Dict[str, np.ndarray] = {}
    for f in filters:
        per_run = np.concatenate([p.per_run[f.label] for p in parts], axis=0)
        first = np.concatenate([p.diverged_at[f.label] for p in parts])
        diverged = first >= 0
        events = [(int(r), int(first[r])) for r in np.flatnonzero(diverged)]
        result = aggregate_runs(f.label, per_run, diverged, config.steady_window, events)
        if result.diverged_runs:
            log = logger.warning if result.flagged else logger.info
            log("%s: %d of %d runs diverged", f.label, result.diverged_runs, result.n_runs)
        results[f.label] = result
        for p in parts:
            if f.label in p.residual:
                residuals[f.label] = p.residual[f.label]
    return results, residuals


def run_monte_carlo(
    config: ScenarioConfig,
    true_weights: Optional[np.ndarray] = None,
    clean_inputs: Optional[np.ndarray] = None,
) -> Dict[str, TrajectoryResult]:
    """Run every configured algorithm over the same n_runs realizations.

    Run r uses the stream seeded with seed ^ r, so results do not depend on
    the worker count or the order in which chunks finish.
    """

    return _monte_carlo(config, true_weights, clean_inputs)[0]


def _pick_algorithm(config: ScenarioConfig, label: Optional[str]) -> AlgorithmCfg:
    return config.algorithm(label) if label is not None else config.algorithms[0]


def sweep(
    parameter: str,
    values: Sequence[float],
    config: ScenarioConfig,
    algorithm: Optional[str] = None,
    true_weights: Optional[np.ndarray] = None,
) -> List[TrajectoryResult]:
    if parameter not in ("gamma", "mu"):
        raise UsageError(f"can only sweep gamma or mu, got {parameter!r}")
    base = _pick_algorithm(config, algorithm)
    if parameter == "gamma" and base.name != "tacldm":
        raise UsageError(f"{base.label} has no gamma parameter")
    out: List[TrajectoryResult] = []
    for value in values:
        alg = replace(base, **{parameter: float(value)}, label=f"{base.label}_{parameter}={float(value):g}")
        cfg = replace(config, algorithms=(alg,))
        out.append(run_monte_carlo(cfg, true_weights)[alg.label])
    return out


@dataclass(frozen=True, eq=False)
class AecResult:
    trajectory: TrajectoryResult
    residual: np.ndarray


def aec_scenario(speech: np.ndarray, echo_ir: np.ndarray, config: ScenarioConfig) -> Dict[str, AecResult]:
    """Echo-path identification from a far-end signal.

    Regressors are tapped-delay windows of the signal, the desired signal is
    the echo d = w_o^T x, EIV noise is added on both sides.
    """

    echo = np.asarray(echo_ir, dtype=float).ravel()
    if echo.size != config.filter_length:
        raise UsageError(f"echo path has {echo.size} taps, filter length is {config.filter_length}")
    x = signal_regressors(speech, config.filter_length, config.n_samples)
    results, residuals = _monte_carlo(config, echo, clean_inputs=x)
    return {label: AecResult(results[label], residuals[label]) for label in results}


def system_from_config(config: ScenarioConfig, true_weights: Optional[np.ndarray] = None) -> SystemSpec:
    if config.input.model != "white_gaussian":
        raise UsageError("closed-form predictions need the white_gaussian input model")
    si = config.input_noise.nominal_variance
    so = config.output_noise.nominal_variance
    if not (si > 0 and so > 0):
        raise UsageError("closed-form predictions need non-zero input and output noise")
    if true_weights is None:
        true_weights = resolve_true_weights(config)
    return SystemSpec.white(true_weights, config.input.variance, si, so)


@dataclass(frozen=True)
class PredictionRow:
    mu: float
    theory_msd_db: float
    simulated_msd_db: Optional[float]
    combined_bound: float


def predict_vs_simulation(
    config: ScenarioConfig,
    gamma: float,
    mus: Sequence[float],
    simulate: bool = False,
) -> List[PredictionRow]:
    true_weights = resolve_true_weights(config)
    system = system_from_config(config, true_weights)
    bound = combined_step_bound(system, gamma).combined
    ref_db = to_db(float(true_weights @ true_weights))
    rows: List[PredictionRow] = []
    for mu in mus:
        theory_db = steady_state_msd(system, gamma, float(mu)).msd_db
        simulated = None
        if simulate:
            alg = AlgorithmCfg(name="tacldm", label=f"tacldm_mu={float(mu):g}", mu=float(mu), gamma=gamma)
            result = run_monte_carlo(replace(config, algorithms=(alg,)), true_weights)[alg.label]
            simulated = result.steady_state_db + ref_db
        rows.append(PredictionRow(mu=float(mu), theory_msd_db=theory_db, simulated_msd_db=simulated, combined_bound=bound))
    return rows


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    axis: np.ndarray
    arctan_cost: np.ndarray  # [i, j] at w = (axis[i], axis[j])
    kernel_cost: np.ndarray
    true_weights: np.ndarray

    def argmax(self, which: str = "arctan") -> Tuple[float, float]:
        grid = self.arctan_cost if which == "arctan" else self.kernel_cost
        i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
        return float(self.axis[i]), float(self.axis[j])


def surface_grid(config: ScenarioConfig, surface: SurfaceCfg, true_weights: Optional[np.ndarray] = None) -> SurfaceGrid:
    """Monte Carlo estimate of E[arctan(psi)] and E[psi] over an L = 2 weight grid.

    All grid points share one set of samples.
    """

    if config.filter_length != 2:
        raise UsageError(f"cost surfaces need filter_length = 2, got {config.filter_length}")
    epsilon = config.default_epsilon()
    if epsilon is None:
        raise UsageError("cost surfaces need non-zero input and output noise")
    wo = resolve_true_weights(config) if true_weights is None else np.asarray(true_weights, dtype=float)
    rng = np.random.default_rng(config.seed)
    N = surface.n_samples
    x = rng.standard_normal((N, 2)) * np.sqrt(config.input.variance)
    u = sample_noise_array(config.input_noise, (N, 2), rng)
    v = sample_noise_array(config.output_noise, N, rng)
    xb = x + u
    db = x @ wo + v

    axis = np.linspace(surface.grid_min, surface.grid_max, surface.grid_points)
    G = axis.size
    arctan_cost = np.empty((G, G))
    kernel_cost = np.empty((G, G))
    for i, w1 in enumerate(axis):
        e = (db - w1 * xb[:, 0])[None, :] - axis[:, None] * xb[None, :, 1]
        norm_sq = (epsilon + w1 * w1 + axis * axis)[:, None]
        p = kernel_psi(e, norm_sq, surface.gamma)
        arctan_cost[i] = np.mean(np.arctan(p), axis=1)
        kernel_cost[i] = np.mean(p, axis=1)
    return SurfaceGrid(axis=axis, arctan_cost=arctan_cost, kernel_cost=kernel_cost, true_weights=wo)
