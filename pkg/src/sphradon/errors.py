"""Exception hierarchy shared by all sphradon modules.

Split by how a failure should be handled at the command line:
validation problems (bad arguments, malformed files) exit with code 1,
numerical failures (infeasible or singular systems, out-of-range inversion
requests) exit with code 2, and I/O trouble exits with code 3.
"""


class SphradonError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SphradonError):
    """Input violates a documented precondition (bad shape, range, format)."""


class NumericalError(SphradonError):
    """A well-posed request failed numerically."""


class CubatureInfeasibleError(NumericalError):
    """No strictly positive exact cubature weights exist on the given lattice."""


class SingularSystemError(NumericalError):
    """Interpolation system numerically singular (coincident or near-dependent
    functionals, or condition number beyond the configured guard)."""


class NotInRangeError(NumericalError):
    """Inverse transform applied to data outside the range of the forward map."""


class TruncationError(NumericalError):
    """Requested accuracy unreachable at the configured series truncation."""
