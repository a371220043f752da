"""Exception hierarchy shared by the engines, the CLI and the service."""

from __future__ import annotations

from typing import Optional


class LabError(Exception):
    """Base class for every error raised by cimlab."""


class DomainError(LabError, ValueError):
    """A real-valued parameter lies outside the domain of an operation."""


class RangeError(LabError, IndexError):
    """A mode index lies outside ``1..n_modes``."""


class ConfigError(LabError, ValueError):
    """An experiment configuration is invalid."""


class IntegrationError(LabError, RuntimeError):
    """A trajectory produced non-finite values."""

    def __init__(self, message: str, time: float) -> None:
        super().__init__(f"{message} (t={time:.6g})")
        self.time = time


class PipelineError(LabError):
    """The robustness pipeline failed for one value of eps."""

    def __init__(self, message: str, eps: Optional[float] = None) -> None:
        suffix = f" (eps={eps:.6g})" if eps is not None else ""
        super().__init__(f"{message}{suffix}")
        self.eps = eps
