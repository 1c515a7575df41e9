"""torusflow: pseudo-spectral Ricci-DeTurck flow from rough data on flat tori."""

__version__ = "0.1.0"

from .grid import TorusGrid, TensorField, MetricField, flat_metric, constant_metric
from .errors import (
    TorusflowError, NonPositiveDefinite, NonPositiveTime, GammaExceeded,
    NoContraction, StepUnstable, JacobianDegenerate, InsufficientLattice,
    BallUnresolved, ResolutionTooCoarse, RadialTangencyViolated,
    UndefinedAtCenter, ConfigInvalid, ManifestMissing,
)

__all__ = [
    "TorusGrid", "TensorField", "MetricField", "flat_metric", "constant_metric",
    "TorusflowError", "NonPositiveDefinite", "NonPositiveTime", "GammaExceeded",
    "NoContraction", "StepUnstable", "JacobianDegenerate", "InsufficientLattice",
    "BallUnresolved", "ResolutionTooCoarse", "RadialTangencyViolated",
    "UndefinedAtCenter", "ConfigInvalid", "ManifestMissing",
]
