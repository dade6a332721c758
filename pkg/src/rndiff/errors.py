"""Exception hierarchy.

Two families matter for the CLI exit-code contract: ``DomainError`` (bad or
excluded input, exit code 1) and ``NumericalError`` (a computation that should
have succeeded did not, exit code 2).
"""


class RnDiffError(Exception):
    """Base class for all library errors."""


class DomainError(RnDiffError):
    """Input outside the supported domain."""


class NumericalError(RnDiffError):
    """Hard numerical failure; results would be unreliable."""


# -- curve construction and charts -------------------------------------------

class DuplicateBranchPoint(DomainError):
    pass


class EvenCount(DomainError):
    pass


class AtBranchPoint(DomainError):
    pass


class NotNearInfinity(DomainError):
    pass


class ContourClearance(DomainError):
    """Branch points too crowded to route the standard cycles."""


# -- homology -----------------------------------------------------------------

class NotClosed(DomainError):
    pass


class LatticeResidualTooLarge(NumericalError):
    """Period vector does not round to an integer class within tolerance."""


# -- differentials and periods ------------------------------------------------

class SeriesDivergence(DomainError):
    """Requested expansion order exceeds the implemented truncation cap."""


class QuadratureFailure(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    """Im(tau) failed the positivity check; upstream quadrature or basis bug."""


# -- real-normalization solver --------------------------------------------------

class TrivialSingularPart(DomainError):
    pass


class IllConditioned(NumericalError):
    pass


class WitnessReconstructionFailed(NumericalError):
    """Periods vanish but no polynomial antiderivative was found."""


# -- critical flow --------------------------------------------------------------

class CountMismatch(NumericalError):
    """Zero count with multiplicity disagrees with the divisor degree."""


class StiffnessFailure(NumericalError):
    """Ray integrator step size underflowed away from any zero."""


# -- leaf walking ----------------------------------------------------------------

class RankDeficient(NumericalError):
    """Period Jacobian rank below 2g where full rank is guaranteed."""


class CorrectionDiverged(NumericalError):
    pass


class NonPositiveLambda(DomainError):
    pass


class EmptyS(DomainError):
    """No zero has a nonvanishing dual period (exact differential)."""


# -- CLI ---------------------------------------------------------------------------

class SchemaError(DomainError):
    pass
