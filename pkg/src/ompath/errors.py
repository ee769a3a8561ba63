"""Exception hierarchy shared by all ompath modules."""


class OmPathError(Exception):
    """Base class for every error raised by this package."""


class SingularDiffusion(OmPathError):
    """sigma(x) sigma(x)^T is numerically singular at an evaluated state."""


class DegenerateGrid(OmPathError):
    """A time grid has fewer than 2 nodes or nonuniform spacing."""


class DimensionMismatch(OmPathError):
    """Array shapes are inconsistent with the system dimension."""


class InvalidHorizon(OmPathError):
    """Requested horizon has tf <= t0."""


class InvalidParams(OmPathError):
    """Model parameters violate their documented constraints."""


class NonpositiveNoise(OmPathError):
    """A noise intensity that must be positive is zero or negative."""


class DerivativeMismatch(OmPathError):
    """Analytic derivative callbacks disagree with finite differences."""


class NumericalBlowup(OmPathError):
    """A sweep produced a state or costate with magnitude above 1e8."""


class AscentStall(OmPathError):
    """Gradient ascent on the Hamiltonian failed to reach tolerance."""


class Diverged(OmPathError):
    """The MSA iteration could not make progress even at minimal damping.

    Carries the partial ``report`` assembled up to the failure.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EmptyEnsemble(OmPathError):
    """An operation requiring accepted sample paths got an empty ensemble."""


class ParseError(OmPathError):
    """A run configuration file is syntactically malformed."""


class ValidationError(OmPathError):
    """A run configuration is syntactically valid but semantically wrong."""
