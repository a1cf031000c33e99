from __future__ import annotations

from typing import Optional


class FilterLabError(Exception):
    """Base class for every error raised by filterlab."""


class ParameterError(FilterLabError, ValueError):
    """A numeric parameter is outside its admissible range."""


class UsageError(FilterLabError, ValueError):
    """Arguments are individually valid but do not fit together (shapes, lengths)."""


class ConfigError(FilterLabError, ValueError):
    """Malformed configuration. The message starts with the dotted key path."""

    def __init__(self, key_path: str, message: str):
        super().__init__(f"{key_path}: {message}")
        self.key_path = key_path


class FilterDivergedError(FilterLabError, ArithmeticError):
    def __init__(self, iteration: int, message: Optional[str] = None):
        super().__init__(message or f"non-finite weights after update {iteration}")
        self.iteration = iteration


class StabilityBoundaryError(FilterLabError, ArithmeticError):
    """(I - F) is singular: the step size sits on the stability boundary."""


class SignalFileError(FilterLabError, OSError):
    """A speech or echo-path file could not be read."""
