from __future__ import annotations

import csv
import json
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .analysis import TrajectoryResult
from .config_loader import ProjectConfig


def new_run_id() -> str:
    ts = time.strftime("%Y%m%d_%H%M%S", time.localtime())
    return f"{ts}_{uuid.uuid4().hex[:8]}"


def fmt(value: Any) -> str:
    """Nine significant digits; None becomes an empty field."""

    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.9g}"


@dataclass
class RunManifest:
    config_path: Optional[str]
    output_dir: str
    seed: int
    emitted_files: List[str] = field(default_factory=list)
    wall_time: float = 0.0


class ResultStore:
    """Writes every artifact of one command into a single output directory.

    Files are written once; each name is recorded for the manifest.
    """

    def __init__(self, cfg: ProjectConfig, out_dir: Optional[Path] = None):
        self.cfg = cfg
        self.base = cfg.results.save_path
        self.run_dir = Path(out_dir) if out_dir is not None else self.base / new_run_id()
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.emitted: List[str] = []

    def _path(self, name: str) -> Path:
        self.emitted.append(name)
        return self.run_dir / name

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        out = self._path(name)
        with out.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
        return out

    def write_curve(self, name: str, result: TrajectoryResult) -> Path:
        return self.write_csv(name, ("iter", "nmsd_db"), enumerate(result.nmsd_db))

    def write_residual(self, name: str, residual: np.ndarray) -> Path:
        return self.write_csv(name, ("iter", "residual"), enumerate(residual))

    def write_summary(self, results: Dict[str, TrajectoryResult], algorithms: Dict[str, str]) -> Path:
        rows = [
            (label, algorithms.get(label, ""), r.steady_state_db, r.diverged_runs, r.n_runs, str(r.flagged).lower())
            for label, r in results.items()
        ]
        return self.write_csv(
            "summary.csv", ("label", "algorithm", "steady_state_db", "diverged_runs", "n_runs", "flagged"), rows
        )

    def write_config_snapshot(self, raw_yaml: Dict[str, Any]) -> Path:
        out = self._path("config.json")
        out.write_text(json.dumps(raw_yaml, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        return out

    def write_manifest(self, manifest: RunManifest) -> Path:
        manifest.emitted_files = list(self.emitted) + ["manifest.json"]
        out = self.run_dir / "manifest.json"
        out.write_text(json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")
        return out
