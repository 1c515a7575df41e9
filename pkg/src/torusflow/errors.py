"""Exception types shared across the package."""


class TorusflowError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveDefinite(TorusflowError):
    """A metric failed the pointwise positive-definiteness check."""


class NonPositiveTime(TorusflowError):
    """A heat-kernel query was made at time t <= 0."""


class GammaExceeded(TorusflowError):
    """|h| reached 1, so the inverse-metric expansion is invalid."""


class NoContraction(TorusflowError):
    """Fixed-point iteration stopped contracting (initial data too large)."""


class StepUnstable(TorusflowError):
    """A time step left the bilipschitz neighborhood of the background."""


class JacobianDegenerate(TorusflowError):
    """A displacement map lost invertibility (det(I + Du) <= 0)."""


class InsufficientLattice(TorusflowError):
    """A trajectory does not store enough times for the requested norm."""


class BallUnresolved(TorusflowError):
    """A requested ball is below the grid resolution floor."""


class ResolutionTooCoarse(TorusflowError):
    """The grid cannot hold the requested spectral content."""


class RadialTangencyViolated(TorusflowError):
    """An angular profile has a nonzero radial-radial component."""


class UndefinedAtCenter(TorusflowError):
    """The weight w_0 is undefined at (x0, 0)."""


class ConfigInvalid(TorusflowError):
    """A scenario configuration failed schema validation."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class ManifestMissing(TorusflowError):
    """An artifact directory has no readable manifest."""
