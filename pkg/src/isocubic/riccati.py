"""Closed-form solution branches of the su(2) Riccati sub-problem.

Reversing the roles of ``X`` and ``P`` in ``(I - hP) X (I + hP) = Y`` gives the
quadratic equation

    h^2 P X P + h [P, X] + Y - X = 0.

On su(2) identified with R^3 through ``v -> -(i/2) v . sigma`` (so that the
commutator is the cross product) the products reduce to

    P X P    ->  |p|^2 x / 4 - (p . x) p / 2
    [P, X]   ->  p x x

Splitting ``p = a x/|x| + p_perp`` turns the equation into a scalar quadratic
for ``u = h^2 a^2 / 4`` plus a 2x2 linear system for ``p_perp``.  Whenever
``u > 0`` both signs of ``a`` give a solution, so the quadratic iteration is not
well defined.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, frobenius_norm

__all__ = [
    "PAULI",
    "su2_matrix",
    "su2_vector",
    "care_residual",
    "Branch",
    "RiccatiBranches",
    "NoRealSolutionError",
    "solve_su2_branches",
    "random_admissible",
]

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
_BASIS = -0.5j * PAULI


def su2_matrix(v) -> np.ndarray:
    """2x2 traceless skew-Hermitian matrix of a vector in R^3."""
    return np.einsum("a,aij->ij", np.asarray(v, dtype=float), _BASIS)


def su2_vector(A) -> np.ndarray:
    """Inverse of :func:`su2_matrix`; ignores any non-su(2) part of ``A``."""
    A = np.asarray(A)
    # <e_a, e_b> = delta_ab / 2 under Re Tr(A^* B)
    return 2.0 * np.einsum("aij,ij->a", _BASIS.conj(), A).real


def care_residual(P: AlgebraElement, X: AlgebraElement, Y: AlgebraElement, h: float):
    """``h^2 P X P + h [P, X] + Y - X``."""
    PX = P @ X
    return (h * h) * (PX @ P) + h * (PX - X @ P) + Y - X


class NoRealSolutionError(ValueError):
    pass


@dataclass
class Branch:
    p_parallel: np.ndarray
    p_perp: np.ndarray
    residual: float

    @property
    def p(self) -> np.ndarray:
        return self.p_parallel + self.p_perp

    def matrix(self) -> AlgebraElement:
        return AlgebraElement.from_matrix(su2_matrix(self.p))


@dataclass
class RiccatiBranches:
    plus: Branch
    minus: Branch

    @property
    def distinct(self) -> bool:
        return not np.allclose(self.plus.p, self.minus.p, rtol=0, atol=1e-14)

    def __iter__(self):
        return iter((self.plus, self.minus))


def _perp_solve(x, y_perp, a, h):
    nx = np.linalg.norm(x)
    xhat = x / nx
    # R v = -h^2 a |x| v / 2 + h v x x on the plane orthogonal to x; the
    # xhat xhat^T term makes the full 3x3 matrix invertible without changing it there
    cross_x = np.array([[0, x[2], -x[1]], [-x[2], 0, x[0]], [x[1], -x[0], 0]])
    R = -0.5 * h * h * a * nx * np.eye(3) + h * cross_x
    R_full = R + np.outer(xhat, xhat)
    if np.linalg.cond(R_full) > 1e12:
        raise np.linalg.LinAlgError("restricted perpendicular map is singular")
    v = np.linalg.solve(R_full, -y_perp)
    return v - xhat * (xhat @ v)


def solve_su2_branches(x, y, h: float) -> RiccatiBranches:
    """Both solutions ``p`` of the Riccati equation for given ``x``, ``y`` in R^3."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("x must be nonzero")
    xhat = x / nx
    c = y @ xhat
    y_perp = y - c * xhat
    d = (c - nx) / nx
    q = (y_perp @ y_perp) / (4 * nx * nx)
    if d + q < -1e-15:
        raise NoRealSolutionError(
            f"no real solution: (y.x/|x| - |x|)/|x| + |y_perp|^2/(4|x|^2) = {d + q:.6g} < 0"
        )
    u = 0.5 * (d - 1 + np.sqrt((1 + d) ** 2 + 4 * q))
    u = max(u, 0.0)
    a = 2.0 * np.sqrt(u) / h

    X = AlgebraElement.from_matrix(su2_matrix(x))
    Y = AlgebraElement.from_matrix(su2_matrix(y))
    branches = []
    for sign in (1.0, -1.0):
        p_par = sign * a * xhat
        p_perp = _perp_solve(x, y_perp, sign * a, h)
        P = AlgebraElement.from_matrix(su2_matrix(p_par + p_perp))
        res = frobenius_norm(care_residual(P, X, Y, h))
        branches.append(Branch(p_par, p_perp, res))
    return RiccatiBranches(*branches)


def random_admissible(seed: int, h: float, scale: float = 1.0):
    """Random ``(x, y)`` with ``y = x + h^2 z`` admitting two distinct branches."""
    rng = np.random.default_rng(seed)
    while True:
        x = rng.standard_normal(3)
        z = scale * rng.standard_normal(3)
        if z @ x > 0.05 * np.linalg.norm(x) * np.linalg.norm(z):
            return x, x + h * h * z
