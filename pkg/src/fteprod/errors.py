"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: configuration problems (``DomainError``,
``BudgetError``, ``ParameterError``) exit with 2, ``ConvergenceError`` with 3.
"""


class FteprodError(Exception):
    pass


class ParameterError(FteprodError, ValueError):
    """Inconsistent ensemble parameters or unsupported ensemble kind."""


class DomainError(FteprodError, ValueError):
    """Argument outside the domain of a special function or formula."""


class BudgetError(FteprodError, ValueError):
    """Request exceeds a combinatorial cost cap (permanent size, k-point terms)."""


class ConvergenceError(FteprodError, RuntimeError):
    """A quadrature, contour integral or eigen-iteration failed to converge."""
