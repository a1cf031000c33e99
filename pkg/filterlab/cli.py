from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .analysis import TrajectoryResult, iterations_to
from .config_loader import ProjectConfig, apply_overrides, load_yaml, parse_config
from .errors import FilterLabError, UsageError
from .result_store import ResultStore, RunManifest
from .runner import (
    aec_scenario,
    predict_vs_simulation,
    run_monte_carlo,
    surface_grid,
    sweep,
    system_from_config,
)
from .sampler import signal_regressors
from .signals import read_impulse_response, read_wav_pcm16, synthetic_echo_path, synthetic_speech
from .theory import combined_step_bound, hessian_spectrum

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path("config") / "default.yaml"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 2


def _divergence_status(results: List[TrajectoryResult], allow: bool) -> int:
    diverged = [r for r in results if r.diverged_runs]
    if diverged and not allow:
        for r in diverged:
            logger.error("%s: %d of %d runs diverged (pass --allow-divergence if expected)",
                         r.label, r.diverged_runs, r.n_runs)
        return EXIT_DIVERGED
    return EXIT_OK


def _algorithm_names(cfg: ProjectConfig) -> Dict[str, str]:
    return {a.label: a.name for a in cfg.scenario.algorithms}


def cmd_identify(cfg: ProjectConfig, store: ResultStore, args: argparse.Namespace) -> int:
    sc = cfg.scenario
    clean_inputs = None
    if sc.input.model == "speech_file":
        speech = read_wav_pcm16(sc.input.speech_path)
        clean_inputs = signal_regressors(speech, sc.filter_length, sc.n_samples)
    results = run_monte_carlo(sc, clean_inputs=clean_inputs)
    for label, r in results.items():
        store.write_curve(f"{label}.csv", r)
        logger.info("%s: steady-state NMSD %.2f dB", label, r.steady_state_db)
    store.write_summary(results, _algorithm_names(cfg))
    return _divergence_status(list(results.values()), args.allow_divergence)


def cmd_sweep(cfg: ProjectConfig, store: ResultStore, args: argparse.Namespace) -> int:
    sw = cfg.sweep
    if not sw.values:
        raise UsageError("sweep.values is empty")
    results = sweep(sw.parameter, sw.values, cfg.scenario, sw.algorithm)
    rows = []
    for value, r in zip(sw.values, results):
        store.write_curve(f"{r.label}.csv", r)
        rows.append((value, r.steady_state_db, iterations_to(r, -10.0), r.diverged_runs))
        logger.info("%s = %g: steady-state NMSD %.2f dB", sw.parameter, value, r.steady_state_db)
    store.write_csv("sweep.csv", ("value", "steady_state_db", "iters_to_-10db", "diverged_runs"), rows)
    return _divergence_status(results, args.allow_divergence)


def cmd_bounds(cfg: ProjectConfig, store: ResultStore, args: argparse.Namespace) -> int:
    gamma = cfg.theory.gamma
    system = system_from_config(cfg.scenario)
    bounds = combined_step_bound(system, gamma)
    spectrum = hessian_spectrum(system, gamma)
    store.write_csv("bounds.csv", ("gamma", "mean_bound", "msq_bound", "combined_bound"),
                    [(gamma, bounds.mean_bound, bounds.msq_bound, bounds.combined)])
    store.write_csv("hessian_spectrum.csv", ("index", "eigenvalue"), enumerate(spectrum))
    print(f"gamma               : {gamma:g}")
    print(f"mean bound          : {bounds.mean_bound:.6g}")
    print(f"mean-square bound   : {bounds.msq_bound:.6g}")
    print(f"combined bound      : {bounds.combined:.6g}")
    print(f"Hessian eigenvalues : {' '.join(f'{v:.6g}' for v in spectrum)}")
    return EXIT_OK


def cmd_predict(cfg: ProjectConfig, store: ResultStore, args: argparse.Namespace) -> int:
    rows = predict_vs_simulation(cfg.scenario, cfg.theory.gamma, cfg.theory.mu, simulate=args.simulate)
    store.write_csv(
        "predict.csv",
        ("mu", "theory_msd_db", "simulated_msd_db", "combined_bound"),
        [(r.mu, r.theory_msd_db, r.simulated_msd_db, r.combined_bound) for r in rows],
    )
    for r in rows:
        sim = "" if r.simulated_msd_db is None else f"  simulated {r.simulated_msd_db:8.2f} dB"
        print(f"mu = {r.mu:<8g} theory {r.theory_msd_db:8.2f} dB{sim}")
    return EXIT_OK


def cmd_surface(cfg: ProjectConfig, store: ResultStore, args: argparse.Namespace) -> int:
    grid = surface_grid(cfg.scenario, cfg.surface)
    rows = (
        (grid.axis[i], grid.axis[j], grid.arctan_cost[i, j], grid.kernel_cost[i, j])
        for i in range(grid.axis.size)
        for j in range(grid.axis.size)
    )
    store.write_csv("surface.csv", ("w1", "w2", "arctan_cost", "kernel_cost"), rows)
    w1, w2 = grid.argmax("arctan")
    print(f"arctan cost maximum at ({w1:.4g}, {w2:.4g}), true weights "
          f"({grid.true_weights[0]:.4g}, {grid.true_weights[1]:.4g})")
    return EXIT_OK


def _aec_inputs(cfg: ProjectConfig, args: argparse.Namespace) -> Tuple[np.ndarray, np.ndarray]:
    sc = cfg.scenario
    speech_path = args.speech or cfg.aec.speech_path
    if speech_path is not None:
        speech = read_wav_pcm16(Path(speech_path))
    else:
        logger.info("no speech file given, using a synthetic speech-like signal")
        speech = synthetic_speech(sc.n_samples + sc.filter_length, seed=sc.seed)
    echo_path = args.echo or cfg.aec.echo_path
    if echo_path is not None:
        echo = read_impulse_response(Path(echo_path))
    else:
        echo = synthetic_echo_path(sc.filter_length, seed=sc.weights_seed)
    return speech, echo


def cmd_aec(cfg: ProjectConfig, store: ResultStore, args: argparse.Namespace) -> int:
    speech, echo = _aec_inputs(cfg, args)
    outcome = aec_scenario(speech, echo, cfg.scenario)
    for label, res in outcome.items():
        store.write_curve(f"{label}.csv", res.trajectory)
        store.write_residual(f"{label}_residual.csv", res.residual)
        logger.info("%s: steady-state NMSD %.2f dB", label, res.trajectory.steady_state_db)
    store.write_summary({k: v.trajectory for k, v in outcome.items()}, _algorithm_names(cfg))
    return _divergence_status([v.trajectory for v in outcome.values()], args.allow_divergence)


COMMANDS: Dict[str, Callable[[ProjectConfig, ResultStore, argparse.Namespace], int]] = {
    "identify": cmd_identify,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "predict": cmd_predict,
    "surface": cmd_surface,
    "aec": cmd_aec,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=str(DEFAULT_CONFIG),
        help=f"Path to YAML config (default: {DEFAULT_CONFIG})",
    )
    common.add_argument("--out", type=Path, default=None,
                        help="Output directory (default: timestamped dir under result_management.save_path)")
    common.add_argument("--seed", type=int, default=None, help="Override scenario.seed")
    common.add_argument("--runs", type=int, default=None, help="Override scenario.n_runs")
    common.add_argument("--allow-divergence", action="store_true",
                        help="Exit 0 even when some Monte Carlo runs diverged")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    ap = argparse.ArgumentParser(prog="filterlab", description="TACLDM adaptive filter lab")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("identify", parents=[common], help="Monte Carlo system identification")
    sub.add_parser("sweep", parents=[common], help="Sweep gamma or mu for one algorithm")
    sub.add_parser("bounds", parents=[common], help="Step-size stability bounds and Hessian spectrum")
    p = sub.add_parser("predict", parents=[common], help="Closed-form steady-state MSD")
    p.add_argument("--simulate", action="store_true", help="Also simulate each step size")
    sub.add_parser("surface", parents=[common], help="Expected cost over an L = 2 weight grid")
    p = sub.add_parser("aec", parents=[common], help="Echo-path identification")
    p.add_argument("--speech", type=Path, default=None, help="16-bit PCM mono WAV far-end signal")
    p.add_argument("--echo", type=Path, default=None, help="Echo path, one coefficient per line")
    return ap


def _prepare(args: argparse.Namespace) -> Tuple[ProjectConfig, Dict[str, Any], ResultStore]:
    raw = load_yaml(Path(args.config))
    raw = apply_overrides(raw, seed=args.seed, runs=args.runs)
    cfg = parse_config(raw)
    store = ResultStore(cfg, args.out)
    store.write_config_snapshot(raw)
    return cfg, raw, store


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    started = time.monotonic()
    try:
        cfg, _, store = _prepare(args)
        status = COMMANDS[args.command](cfg, store, args)
    except (FilterLabError, FileNotFoundError) as exc:
        print(f"filterlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    store.write_manifest(RunManifest(
        config_path=str(args.config),
        output_dir=str(store.run_dir),
        seed=cfg.scenario.seed,
        wall_time=time.monotonic() - started,
    ))
    print(f"\nRun complete. Results written to: {store.run_dir}\n")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
