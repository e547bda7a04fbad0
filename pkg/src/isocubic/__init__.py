"""Solvers for the cubic matrix equation behind isospectral Lie-Poisson integrators."""
from .algebra import (
    AlgebraElement,
    BlockShape,
    commutator,
    frobenius_inner,
    frobenius_norm,
    hermitian_eigenvalues,
    lu_factor,
    random_normalized,
    triple_product,
)
from .integrator import IntegratorConfig, StepFailure, TrajectoryDiagnostics
from .integrator import conjugacy_check, hamiltonian, run, step
from .models import initial_value, make_operator, model_shape
from .operators import (
    DriftAlfvenOperator,
    EulerSphereOperator,
    LinearOperator,
    QuantizedLaplacian,
    SpinChainOperator,
    operator_norm,
)
from .solvers import NewtonVariant, SolverConfig, SolverReport
from .solvers import solve, solve_explicit, solve_linear, solve_newton

__version__ = "0.1.0"
