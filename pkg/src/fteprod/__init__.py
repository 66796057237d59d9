"""Fixed-trace and induced Ginibre ensembles, their products, and Monte-Carlo checks.

Subpackages: ``specfun`` (log-space special functions), ``transforms`` (Meijer G,
Laplace pairs), ``analytic`` (finite-N densities and correlators), ``sampler``
(matrix and Coulomb-gas samplers), ``eig`` (eigenvalues of matrices and
products) and ``harness`` (experiments, CLI, verification).
"""

from .errors import BudgetError, ConvergenceError, DomainError, FteprodError, ParameterError

__version__ = "0.1.0"

__all__ = ["BudgetError", "ConvergenceError", "DomainError", "FteprodError", "ParameterError", "__version__"]
