"""Iterative solvers for ``(I - h L X) X (I + h L X) = Y``.

Three schemes are provided, all started from ``X_0 = Y`` and stopped when the
Frobenius norm of the update drops below ``tol``:

* ``explicit``: fixed point of ``F_h(X) = Y + h[LX, X] + h^2 (LX) X (LX)``,
* ``linear``: ``X <- (I - hLX)^{-1} Y (I + hLX)^{-1}`` with one LU per block,
* ``newton``: inexact Newton with a truncated series for the inverse Jacobian.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

from .algebra import AlgebraElement, commutator, frobenius_norm, lu_factor
from .operators import LinearOperator, operator_norm

__all__ = [
    "NewtonVariant",
    "SolverConfig",
    "SolverReport",
    "fixed_point_map",
    "linear_update",
    "residual",
    "jacobian_apply",
    "newton_correction",
    "solve_explicit",
    "solve_linear",
    "solve_newton",
    "solve",
    "SOLVERS",
    "uniqueness_h_bound",
]

DIVERGENCE_THRESHOLD = 1e6


class NewtonVariant(str, enum.Enum):
    """Truncations of ``DF(X)^{-1} = I + hB1 + h^2(B1^2 + B2) + O(h^3)``."""

    V1 = "V1"  # I + hB1
    V2 = "V2"  # I + hB1 + h^2 B2
    V3 = "V3"  # I + hB1 + h^2 B1^2
    V4 = "V4"  # I + hB1 + h^2 (B1^2 + B2)


@dataclass
class SolverConfig:
    h: float
    tol: float = 1e-10
    max_iter: int = 500
    newton_variant: NewtonVariant = NewtonVariant.V2
    initial_guess: Optional[AlgebraElement] = None

    def __post_init__(self):
        self.newton_variant = NewtonVariant(self.newton_variant)
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.h >= 0:
            raise ValueError(f"h must be non-negative, got {self.h}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")


@dataclass
class SolverReport:
    converged: bool
    iterations: int
    final_step_norm: float
    residual_norm: float
    history: list = field(default_factory=list)
    reason: str = ""

    def summary(self) -> str:
        status = "converged" if self.converged else f"NC ({self.reason})"
        return (
            f"{status}: iterations={self.iterations} "
            f"step={self.final_step_norm:.3e} residual={self.residual_norm:.3e}"
        )


def fixed_point_map(X, Y, L: LinearOperator, h: float) -> AlgebraElement:
    """``Y + h[LX, X] + h^2 (LX) X (LX)``."""
    P = L(X)
    PX = P @ X
    return Y + h * (PX - X @ P) + (h * h) * (PX @ P)


def linear_update(X, Y, L: LinearOperator, h: float) -> AlgebraElement:
    """``(I - hLX)^{-1} Y (I + hLX)^{-1}`` from a single LU of ``I - hLX``.

    For skew-Hermitian ``LX`` the right factor is the adjoint of the left
    inverse, so ``Z = A^{-1} Y`` followed by ``(A^{-1} Z^*)^*`` needs only
    solves with ``A = I - hLX``.
    """
    fac = lu_factor(L(X), h)
    Z = fac.solve_minus(Y)
    return fac.solve_plus_adjoint(Z.dagger()).dagger()


def residual(X, Y, L: LinearOperator, h: float) -> AlgebraElement:
    """``F(X) = X - h[LX, X] - h^2 (LX) X (LX) - Y``."""
    return X - fixed_point_map(X, Y, L, h)


def _b1(Z, P, X, L):
    return commutator(L(Z), X) + commutator(P, Z)


def _b2(Z, P, X, L):
    LZ = L(Z)
    XP = X @ P
    return LZ @ XP + P @ Z @ P + P @ X @ LZ


def jacobian_apply(X, Z, L: LinearOperator, h: float) -> AlgebraElement:
    """Exact Jacobian ``DF(X)[Z]`` of the residual map."""
    P = L(X)
    return Z - h * _b1(Z, P, X, L) - (h * h) * _b2(Z, P, X, L)


def newton_correction(X, R, L: LinearOperator, h: float, variant=NewtonVariant.V2):
    """Approximate ``DF(X)^{-1}[R]`` by the truncated series of ``variant``."""
    variant = NewtonVariant(variant)
    X._check(R)
    P = L(X)
    b1 = _b1(R, P, X, L)
    out = R + h * b1
    h2 = h * h
    if variant is NewtonVariant.V2:
        out = out + h2 * _b2(R, P, X, L)
    elif variant is NewtonVariant.V3:
        out = out + h2 * _b1(b1, P, X, L)
    elif variant is NewtonVariant.V4:
        out = out + h2 * (_b1(b1, P, X, L) + _b2(R, P, X, L))
    return out


def _iterate(update: Callable, Y, L, cfg: SolverConfig):
    X = Y if cfg.initial_guess is None else cfg.initial_guess
    X._check(Y)
    history = []
    reason = "max_iter"
    converged = False
    step = float("inf")
    for k in range(1, cfg.max_iter + 1):
        X_new = update(X)
        step = frobenius_norm(X_new - X)
        history.append(step)
        X = X_new
        if step <= cfg.tol:
            converged = True
            reason = ""
            break
        if not step < DIVERGENCE_THRESHOLD:
            reason = "diverged"
            break
    res = frobenius_norm(residual(X, Y, L, cfg.h)) if X.is_finite() else float("nan")
    report = SolverReport(
        converged=converged,
        iterations=k,
        final_step_norm=step,
        residual_norm=res,
        history=history,
        reason=reason,
    )
    return X, report


def solve_explicit(Y, L: LinearOperator, cfg: SolverConfig):
    h = cfg.h
    return _iterate(lambda X: fixed_point_map(X, Y, L, h), Y, L, cfg)


def solve_linear(Y, L: LinearOperator, cfg: SolverConfig):
    h = cfg.h
    return _iterate(lambda X: linear_update(X, Y, L, h), Y, L, cfg)


def solve_newton(Y, L: LinearOperator, cfg: SolverConfig):
    h, variant = cfg.h, cfg.newton_variant

    def update(X):
        return X - newton_correction(X, residual(X, Y, L, h), L, h, variant)

    return _iterate(update, Y, L, cfg)


SOLVERS = {
    "explicit": solve_explicit,
    "linear": solve_linear,
    "newton": solve_newton,
}


def solve(Y, L: LinearOperator, cfg: SolverConfig, method: str = "linear"):
    try:
        fn = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown solver {method!r}; choose from {sorted(SOLVERS)}")
    return fn(Y, L, cfg)


def uniqueness_h_bound(Y, L: LinearOperator, op_norm: Optional[float] = None) -> float:
    """Step size ``1 / (3 ||L||_op ||Y||)`` below which the solution near ``Y`` is unique."""
    ny = frobenius_norm(Y)
    if ny == 0.0:
        raise ValueError("the step-size bound is undefined for Y = 0")
    if op_norm is None:
        op_norm = operator_norm(L)
    return 1.0 / (3.0 * op_norm * ny)
