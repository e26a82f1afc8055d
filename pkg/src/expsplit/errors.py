"""Exception hierarchy shared by all modules.

Exit codes used by the CLI are attached to the classes so that error
handling at the top level stays a single except clause.
"""


class ExpsplitError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(ExpsplitError):
    """Invalid configuration, nodes, norms or arguments."""

    exit_code = 2


class ContractionError(ExpsplitError):
    """The contraction certificate kappa(h) = Omega(h)*C_ell*s*L is >= 1."""

    exit_code = 3


class StripViolationError(ExpsplitError):
    """A trajectory left the configured tube around the reference solution."""

    exit_code = 4


class FixedPointDivergenceError(ExpsplitError):
    """The internal-stage iteration failed to converge within the cap."""

    exit_code = 5


class StudyFailedError(ExpsplitError):
    """A convergence study did not meet its verdict tolerance."""

    exit_code = 6
