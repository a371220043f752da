"""Model exports."""

from .flows import (
    AuditReport,
    DecomposedTrajectory,
    HyperbolicConfig,
    HyperbolicTrajectory,
    ParabolicConfig,
    TrajectoryRecord,
)
from .gap import EigenPair, GapCertificate, Margin
from .manifold import AttractionReport, GraphSample, ManifoldAudit, ManifoldCloud, ManifoldSettings, WindowTimes
from .requests import FitRequest, SimulateRequest
from .robustness import HausdorffReport, RobustnessFit, SingularLimitReport, SweepResult, SweepRow, TailAudit
from .spectral import CutoffParams, EpsWeight, ProductState, SpectralField

__all__ = [
    "SpectralField",
    "ProductState",
    "EpsWeight",
    "CutoffParams",
    "GapCertificate",
    "Margin",
    "EigenPair",
    "ParabolicConfig",
    "HyperbolicConfig",
    "TrajectoryRecord",
    "HyperbolicTrajectory",
    "DecomposedTrajectory",
    "AuditReport",
    "GraphSample",
    "ManifoldCloud",
    "ManifoldSettings",
    "WindowTimes",
    "ManifoldAudit",
    "AttractionReport",
    "HausdorffReport",
    "RobustnessFit",
    "SweepRow",
    "SweepResult",
    "SingularLimitReport",
    "TailAudit",
    "FitRequest",
    "SimulateRequest",
]
