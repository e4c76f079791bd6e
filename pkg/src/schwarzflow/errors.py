"""Exception types shared across the library."""


class SchwarzflowError(Exception):
    """Base class for all library errors."""


class InvalidProfile(SchwarzflowError):
    """Profile fails the admissibility conditions at the pole."""


class NonPositiveProfile(SchwarzflowError):
    """Profile is not strictly positive at an interior sample."""


class DomainExceeded(SchwarzflowError):
    """Radius outside the profile's domain of definition."""


class VolumeExceedsManifold(SchwarzflowError):
    """Requested volume is not attained by any centered ball."""


class CompactProfile(SchwarzflowError):
    """Operation requires a noncompact profile."""


class UnsupportedTail(SchwarzflowError):
    """Function does not vanish at the outer grid radius."""


class GridMismatch(SchwarzflowError):
    """Operands live on different grids and resampling is disabled."""


class ZeroEnergy(SchwarzflowError):
    """Dirichlet energy vanishes, so an energy ratio is undefined."""


class ShootingBracketFailed(SchwarzflowError):
    """Boundary mismatch never changes sign over the shooting bracket."""


class NonConvergence(SchwarzflowError):
    """Iteration budget exhausted before reaching tolerance."""


class PreconditionOrderFails(SchwarzflowError):
    """Required concentration ordering between data does not hold."""


class StepRejected(SchwarzflowError):
    """A time step violated a monotonicity contract beyond tolerance."""


class ExperimentInconsistent(SchwarzflowError):
    """An experiment invariant that holds on every model failed; solver bug."""


class ParseError(SchwarzflowError):
    """Expression text could not be parsed.

    Attributes
    ----------
    offset : byte offset of the failure in the source text.
    expected : set of token descriptions that would have been accepted.
    """

    def __init__(self, message: str, offset: int, expected: set[str] | None = None):
        super().__init__(f"{message} at offset {offset}"
                         + (f" (expected one of: {', '.join(sorted(expected))})" if expected else ""))
        self.offset = offset
        self.expected = expected or set()


class EvalDomainError(SchwarzflowError):
    """Expression evaluation left the domain of a function (e.g. log of <= 0)."""


class ScenarioError(SchwarzflowError):
    """Scenario document failed validation."""


class IoError(SchwarzflowError):
    """Output directory or file could not be written."""
