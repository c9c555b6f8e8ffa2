"""Exception hierarchy for the toolkit.

Two broad classes matter for the CLI exit codes: configuration/validation
problems (exit code 1) and numerical failures discovered at run time
(exit code 2).  Everything derives from :class:`ToolkitError`.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationFailure(ToolkitError):
    """Bad input: configs, preconditions, malformed data (CLI exit 1)."""


class NumericalFailure(ToolkitError):
    """Failure detected while computing (CLI exit 2)."""


# -- metric construction and evaluation -------------------------------------

class EvaluationOutsideDomain(NumericalFailure):
    """Metric or flow evaluated outside its declared validity region."""


class InvalidProfile(ValidationFailure):
    """A radial flow profile violates its stated constraints."""


class SingularMetric(NumericalFailure):
    """The contravariant metric matrix is not invertible at a point."""


class NotAxisymmetric(ValidationFailure):
    """Sampled azimuthal dependence exceeds tolerance."""


# -- characteristic geometry -------------------------------------------------

class NoRealCharacteristics(NumericalFailure):
    """No real spatial characteristic directions (outside the ergoregion)."""


class NotOnErgosphere(ValidationFailure):
    """Point is not on the degenerate locus within tolerance."""


class DegenerateRank(NumericalFailure):
    """Spatial block rank dropped below n-1 at a degenerate-locus point."""


class MalformedCurve(ValidationFailure):
    """Curve samples are open, too few, or self-intersecting."""


class MixedSign(NumericalFailure):
    """Classification sign is not uniform along the surface samples."""


class NotCharacteristic(ValidationFailure):
    """Surface fails the characteristic-residual precondition."""


class ZeroRoot(NumericalFailure):
    """The nonzero time root degenerated to zero (bad input surface)."""


class NotInErgoregion(ValidationFailure):
    """Curve or point expected strictly inside the ergoregion is not."""


class FrameDiscontinuity(NumericalFailure):
    """Continuity labeling of the direction families failed."""


# -- ray and orbit integration -----------------------------------------------

class ConstraintDrift(NumericalFailure):
    """Null-constraint residual exceeded its budget during integration."""


# -- horizon search ------------------------------------------------------------

class NoSignChange(NumericalFailure):
    """A probe ray saw no sign change of the spatial determinant."""

    def __init__(self, message: str, angle: float | None = None):
        super().__init__(message)
        self.angle = angle


class NoReturn(NumericalFailure):
    """Orbit left the ergoregion or exhausted its budget before returning."""


# -- wave solver ----------------------------------------------------------------

class GridTooCoarse(ValidationFailure, Warning):
    """Fewer grid points than advised per characteristic wavelength.

    Advisory: issued through :mod:`warnings` rather than raised.
    """


class CFLViolation(ValidationFailure):
    """Requested time step exceeds the stability bound."""


class NonFiniteField(NumericalFailure):
    """NaN or Inf detected in an evolved field."""


class ZeroEnergy(NumericalFailure):
    """Initial total energy vanished; trapping ratio undefined."""


# -- boundary-data experiments ---------------------------------------------------

class NormalizationDomainError(NumericalFailure):
    """Conormal normalization undefined: the rim lies inside the ergoregion."""


class NotABlackHole(ValidationFailure):
    """Base metric did not classify as a black hole."""


class PerturbationLeak(ValidationFailure):
    """Perturbation support violates the horizon margin."""


class BoundaryPotentialNonzero(ValidationFailure):
    """Gradient-flow potential does not vanish on the outer rim."""


# -- configuration ------------------------------------------------------------------

class ConfigError(ValidationFailure):
    """Base class for scenario-configuration problems."""


class ParseError(ConfigError):
    """Config file is unreadable or not well-formed."""


class UnknownKey(ConfigError):
    """Config contains a key or section outside the schema."""


class ValidationError(ConfigError):
    """Config value failed validation; message cites the key path."""
