from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from .errors import ConfigError, FilterLabError
from .noise import (
    BinaryNoise,
    GGParams,
    ImpulsiveMixture,
    NoiseSpec,
    NoNoise,
    UniformNoise,
)

ALGORITHM_NAMES = ("tacldm", "lms", "gdtls")
INPUT_MODELS = ("white_gaussian", "speech_file")
SWEEP_PARAMETERS = ("gamma", "mu")


def load_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", f"config must be a mapping, got {type(data).__name__}")
    return data


@dataclass(frozen=True)
class InputCfg:
    model: str = "white_gaussian"
    variance: float = 1.0
    speech_path: Optional[Path] = None


@dataclass(frozen=True)
class AlgorithmCfg:
    name: str
    label: str
    mu: float
    gamma: Optional[float] = None
    epsilon: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    filter_length: int
    n_samples: int
    n_runs: int
    seed: int
    input: InputCfg
    input_noise: NoiseSpec
    output_noise: NoiseSpec
    algorithms: Tuple[AlgorithmCfg, ...]
    tracking_flip_at: Optional[int] = None
    steady_window: int = 500
    true_weights: Optional[Tuple[float, ...]] = None
    weights_seed: int = 0
    initial_weights: Optional[Tuple[float, ...]] = None
    divergence_threshold_db: float = 10.0
    blowup_norm: float = 1e8

    def default_epsilon(self) -> Optional[float]:
        """Noise-variance ratio of the background processes (impulses excluded)."""

        si = self.input_noise.nominal_variance
        so = self.output_noise.nominal_variance
        if si > 0 and so > 0:
            return so / si
        return None

    def algorithm(self, label: str) -> AlgorithmCfg:
        for a in self.algorithms:
            if a.label == label:
                return a
        raise ConfigError("algorithms", f"no algorithm labelled {label!r}")


@dataclass(frozen=True)
class SweepCfg:
    parameter: str = "gamma"
    values: Tuple[float, ...] = ()
    algorithm: Optional[str] = None


@dataclass(frozen=True)
class TheoryCfg:
    gamma: float = 1.4
    mu: Tuple[float, ...] = (0.1,)


@dataclass(frozen=True)
class SurfaceCfg:
    gamma: float = 1.0
    grid_min: float = -2.0
    grid_max: float = 2.0
    grid_points: int = 41
    n_samples: int = 5000


@dataclass(frozen=True)
class AecCfg:
    speech_path: Optional[Path] = None
    echo_path: Optional[Path] = None


@dataclass(frozen=True)
class ResultMgmtCfg:
    save_path: Path = Path("results")


@dataclass(frozen=True)
class ProjectConfig:
    scenario: ScenarioConfig
    sweep: SweepCfg
    theory: TheoryCfg
    surface: SurfaceCfg
    aec: AecCfg
    results: ResultMgmtCfg


def _section(raw: Mapping[str, Any], key: str, path: str) -> Mapping[str, Any]:
    value = raw.get(key)
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(path, "must be a mapping")
    return value


def _number(raw: Mapping[str, Any], key: str, path: str, default: Any = None, *, positive: bool = False,
            nonnegative: bool = False) -> Optional[float]:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "must be a number")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", f"must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{path}.{key}", "must be finite")
    if positive and not out > 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {out}")
    if nonnegative and not out >= 0:
        raise ConfigError(f"{path}.{key}", f"must be >= 0, got {out}")
    return out


def _integer(raw: Mapping[str, Any], key: str, path: str, default: Any = None, *, minimum: Optional[int] = None) -> Optional[int]:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{path}.{key}", f"must be an integer, got {value!r}")
    out = int(value)
    if minimum is not None and out < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}, got {out}")
    return out


def _vector(raw: Mapping[str, Any], key: str, path: str) -> Optional[Tuple[float, ...]]:
    value = raw.get(key)
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{path}.{key}", "must be a non-empty list of numbers")
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", "must be a list of numbers") from None
    if not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{path}.{key}", "entries must be finite")
    return out


def parse_noise(raw: Any, path: str, allow_mixture: bool = True) -> NoiseSpec:
    """Build a NoiseSpec from keys kind, alpha, variance, half_width, level, prob,
    impulse_std_ratio, base."""

    if raw is None:
        return GGParams(alpha=2.0, variance=0.1)
    if not isinstance(raw, Mapping):
        raise ConfigError(path, "must be a mapping")
    kind = str(raw.get("kind", "generalized_gaussian")).lower()
    try:
        if kind in ("generalized_gaussian", "gaussian", "laplacian"):
            alpha = {"gaussian": 2.0, "laplacian": 1.0}.get(kind)
            if alpha is None:
                alpha = _number(raw, "alpha", path, 2.0, positive=True)
            return GGParams(alpha=alpha, variance=_number(raw, "variance", path, 0.1, positive=True))
        if kind == "uniform":
            h = _number(raw, "half_width", path, positive=True)
            if h is None:
                h = math.sqrt(3.0 * _number(raw, "variance", path, 0.1, positive=True))
            return UniformNoise(half_width=h)
        if kind == "binary":
            level = _number(raw, "level", path, positive=True)
            if level is None:
                level = math.sqrt(_number(raw, "variance", path, 0.1, positive=True))
            return BinaryNoise(level=level)
        if kind == "impulsive_mixture":
            if not allow_mixture:
                raise ConfigError(f"{path}.kind", "a mixture base cannot itself be a mixture")
            base = parse_noise(raw.get("base"), f"{path}.base", allow_mixture=False)
            prob = _number(raw, "prob", path, 0.01)
            if not 0.0 < prob < 1.0:
                raise ConfigError(f"{path}.prob", f"must be in (0, 1), got {prob}")
            ratio = _number(raw, "impulse_std_ratio", path, 100.0, positive=True)
            return ImpulsiveMixture(base=base, prob=prob, impulse_std_ratio=ratio)
        if kind == "none":
            return NoNoise()
    except ConfigError:
        raise
    except FilterLabError as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown noise kind {kind!r}")


def _parse_algorithms(raw: Any, default_epsilon: Optional[float]) -> Tuple[AlgorithmCfg, ...]:
    if raw is None:
        raw = [{"name": "tacldm", "mu": 0.1, "gamma": 1.4}]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("algorithms", "must be a non-empty list")
    out: List[AlgorithmCfg] = []
    labels = set()
    for i, a in enumerate(raw):
        path = f"algorithms[{i}]"
        if not isinstance(a, Mapping):
            raise ConfigError(path, "must be a mapping")
        name = str(a.get("name", "")).lower()
        if name not in ALGORITHM_NAMES:
            raise ConfigError(f"{path}.name", f"must be one of {', '.join(ALGORITHM_NAMES)}, got {name!r}")
        label = str(a.get("label", name))
        if label in labels:
            raise ConfigError(f"{path}.label", f"duplicate label {label!r}")
        labels.add(label)
        mu = _number(a, "mu", path, nonnegative=True)
        if mu is None:
            raise ConfigError(f"{path}.mu", "required")
        gamma = _number(a, "gamma", path, positive=True)
        if name == "tacldm" and gamma is None:
            raise ConfigError(f"{path}.gamma", "required for tacldm")
        epsilon = _number(a, "epsilon", path, positive=True)
        if name != "lms" and epsilon is None and default_epsilon is None:
            raise ConfigError(f"{path}.epsilon", "required when a noise variance is zero")
        out.append(AlgorithmCfg(name=name, label=label, mu=mu, gamma=gamma, epsilon=epsilon))
    return tuple(out)


def parse_scenario(raw: Mapping[str, Any]) -> ScenarioConfig:
    sc = _section(raw, "scenario", "scenario")
    L = _integer(sc, "filter_length", "scenario", 9, minimum=1)
    n_samples = _integer(sc, "n_samples", "scenario", 3000, minimum=2)
    steady_window = _integer(sc, "steady_window", "scenario", min(500, n_samples - 1), minimum=1)
    if not steady_window < n_samples:
        raise ConfigError("scenario.steady_window", f"must be < n_samples ({n_samples})")
    flip = _integer(sc, "tracking_flip_at", "scenario", None, minimum=1)
    if flip is not None and flip >= n_samples:
        raise ConfigError("scenario.tracking_flip_at", f"must be < n_samples ({n_samples})")

    system = _section(raw, "system", "system")
    true_weights = _vector(system, "true_weights", "system")
    initial_weights = _vector(system, "initial_weights", "system")
    for key, vec in (("true_weights", true_weights), ("initial_weights", initial_weights)):
        if vec is not None and len(vec) != L:
            raise ConfigError(f"system.{key}", f"must have filter_length={L} entries, got {len(vec)}")
    if true_weights is not None and not any(true_weights):
        raise ConfigError("system.true_weights", "must not be all zeros (NMSD is normalised by |w_o|)")

    inp = _section(raw, "input", "input")
    model = str(inp.get("model", "white_gaussian")).lower()
    if model not in INPUT_MODELS:
        raise ConfigError("input.model", f"must be one of {', '.join(INPUT_MODELS)}, got {model!r}")
    speech_path = inp.get("speech_path")
    if model == "speech_file" and not speech_path:
        raise ConfigError("input.speech_path", "required for model speech_file")
    input_cfg = InputCfg(
        model=model,
        variance=_number(inp, "variance", "input", 1.0, positive=True),
        speech_path=Path(speech_path) if speech_path else None,
    )

    noise = _section(raw, "noise", "noise")
    input_noise = parse_noise(noise.get("input"), "noise.input")
    output_noise = parse_noise(noise.get("output"), "noise.output")
    so, si = output_noise.nominal_variance, input_noise.nominal_variance
    default_epsilon = so / si if so > 0 and si > 0 else None

    return ScenarioConfig(
        filter_length=L,
        n_samples=n_samples,
        n_runs=_integer(sc, "n_runs", "scenario", 100, minimum=1),
        seed=_integer(sc, "seed", "scenario", 0, minimum=0),
        input=input_cfg,
        input_noise=input_noise,
        output_noise=output_noise,
        algorithms=_parse_algorithms(raw.get("algorithms"), default_epsilon),
        tracking_flip_at=flip,
        steady_window=steady_window,
        true_weights=true_weights,
        weights_seed=_integer(system, "weights_seed", "system", 0, minimum=0),
        initial_weights=initial_weights,
        divergence_threshold_db=_number(sc, "divergence_threshold_db", "scenario", 10.0),
        blowup_norm=_number(sc, "blowup_norm", "scenario", 1e8, positive=True),
    )


def parse_config(raw: Dict[str, Any]) -> ProjectConfig:
    scenario = parse_scenario(raw)

    sw = _section(raw, "sweep", "sweep")
    parameter = str(sw.get("parameter", "gamma")).lower()
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError("sweep.parameter", f"must be gamma or mu, got {parameter!r}")
    values = _vector(sw, "values", "sweep") or ()
    sweep = SweepCfg(parameter=parameter, values=values, algorithm=sw.get("algorithm"))
    if sweep.algorithm is not None:
        scenario.algorithm(str(sweep.algorithm))

    th = _section(raw, "theory", "theory")
    mus = th.get("mu", [0.1])
    if not isinstance(mus, list):
        mus = [mus]
    theory = TheoryCfg(
        gamma=_number(th, "gamma", "theory", 1.4, positive=True),
        mu=_vector({"mu": mus}, "mu", "theory"),
    )
    if any(m < 0 for m in theory.mu):
        raise ConfigError("theory.mu", "entries must be >= 0")

    sf = _section(raw, "surface", "surface")
    surface = SurfaceCfg(
        gamma=_number(sf, "gamma", "surface", 1.0, positive=True),
        grid_min=_number(sf, "grid_min", "surface", -2.0),
        grid_max=_number(sf, "grid_max", "surface", 2.0),
        grid_points=_integer(sf, "grid_points", "surface", 41, minimum=2),
        n_samples=_integer(sf, "n_samples", "surface", 5000, minimum=1),
    )
    if not surface.grid_max > surface.grid_min:
        raise ConfigError("surface.grid_max", "must be > grid_min")

    ae = _section(raw, "aec", "aec")
    aec = AecCfg(
        speech_path=Path(ae["speech_path"]) if ae.get("speech_path") else None,
        echo_path=Path(ae["echo_path"]) if ae.get("echo_path") else None,
    )

    rm = _section(raw, "result_management", "result_management")
    results = ResultMgmtCfg(save_path=Path(rm.get("save_path", "results")))

    return ProjectConfig(scenario=scenario, sweep=sweep, theory=theory, surface=surface, aec=aec, results=results)


def apply_overrides(raw: Dict[str, Any], seed: Optional[int] = None, runs: Optional[int] = None,
                    save_path: Optional[Path] = None) -> Dict[str, Any]:
    """Return a copy of the raw mapping with command-line overrides applied."""

    cfg = copy.deepcopy(raw)
    sc = dict(cfg.get("scenario") or {})
    if seed is not None:
        sc["seed"] = int(seed)
    if runs is not None:
        sc["n_runs"] = int(runs)
    cfg["scenario"] = sc
    if save_path is not None:
        rm = dict(cfg.get("result_management") or {})
        rm["save_path"] = str(save_path)
        cfg["result_management"] = rm
    return cfg
