"""Signal and impulse-response files for the echo cancellation scenario."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import lfilter

from .errors import SignalFileError

logger = logging.getLogger(__name__)

PCM16_FULL_SCALE = 32768.0


def read_wav_pcm16(path: Path) -> np.ndarray:
    """Mono 16-bit PCM WAV as float samples in [-1, 1)."""

    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except (OSError, ValueError, EOFError) as exc:
        raise SignalFileError(f"{path}: cannot read WAV ({exc})") from exc
    if data.dtype != np.int16:
        raise SignalFileError(f"{path}: expected 16-bit PCM, got {data.dtype}")
    if data.ndim != 1:
        raise SignalFileError(f"{path}: expected mono, got {data.shape[1]} channels")
    logger.debug("read %s: %d samples at %d Hz", path, data.size, rate)
    return data.astype(float) / PCM16_FULL_SCALE


def read_impulse_response(path: Path) -> np.ndarray:
    """One coefficient per line; blank lines and lines starting with # are skipped."""

    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SignalFileError(f"{path}: cannot read impulse response ({exc})") from exc
    taps = []
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            taps.append(float(line))
        except ValueError:
            raise SignalFileError(f"{path}:{n}: not a number: {line!r}") from None
    if not taps:
        raise SignalFileError(f"{path}: no coefficients")
    h = np.asarray(taps)
    if not np.all(np.isfinite(h)):
        raise SignalFileError(f"{path}: coefficients must be finite")
    return h


def synthetic_echo_path(length: int, seed: int = 0) -> np.ndarray:
    """Decaying random impulse response with unit norm."""

    rng = np.random.default_rng(seed)
    h = rng.standard_normal(length) * np.exp(-np.arange(length) / 3.0)
    return h / np.linalg.norm(h)


def synthetic_speech(n_samples: int, seed: int = 0) -> np.ndarray:
    """Speech-like test signal: AR(2) filtered Gaussian noise under a slow syllabic envelope."""

    rng = np.random.default_rng(seed)
    s = lfilter([1.0], [1.0, -1.6, 0.8], rng.standard_normal(n_samples))
    envelope = 0.55 + 0.45 * np.sin(2.0 * np.pi * np.arange(n_samples) / 800.0)
    s *= envelope
    return 0.5 * s / np.max(np.abs(s))
