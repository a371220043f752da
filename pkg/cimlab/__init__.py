"""cimlab package exports."""

# Re-export the numerical operations; the HTTP app lives in cimlab.main
from .adapters import *  # noqa: F401,F403
from .adapters import __all__ as _ops
from .errors import ConfigError, DomainError, IntegrationError, LabError, PipelineError, RangeError

__all__ = [*_ops, "LabError", "DomainError", "RangeError", "ConfigError", "IntegrationError", "PipelineError"]
