"""Dense ground truth: the algebra in real coordinates and exact Newton.

Everything here is quadratic or cubic in the algebra dimension and is only
meant for small problems.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .algebra import AlgebraElement, BlockShape, frobenius_norm
from .operators import LinearOperator
from .solvers import jacobian_apply, residual

__all__ = [
    "gell_mann_basis",
    "VectorizedProblem",
    "assemble_operator_matrix",
    "jacobian_matrix",
    "fd_jacobian_error",
    "oracle_solve",
    "OracleError",
]

ORACLE_MAX_DIM = 200
ASSEMBLY_MAX_DIM = 4000


class OracleError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def gell_mann_basis(n: int, traceless: bool = True) -> np.ndarray:
    """Orthonormal basis of su(n) as an array ``(n*n - 1, n, n)``.

    Generalized Gell-Mann matrices times ``i``, scaled to unit Frobenius norm.
    With ``traceless=False`` the scaled identity ``i I / sqrt(n)`` is appended,
    giving a basis of u(n).
    """
    out = []
    s = 1 / np.sqrt(2)
    for j in range(n):
        for k in range(j + 1, n):
            E = np.zeros((n, n), complex)
            E[j, k] = E[k, j] = 1j * s
            out.append(E)
            E = np.zeros((n, n), complex)
            E[j, k], E[k, j] = s, -s
            out.append(E)
    for m in range(1, n):
        d = np.zeros(n)
        d[:m] = 1
        d[m] = -m
        out.append(np.diag(1j * d / np.linalg.norm(d)))
    if not traceless:
        out.append(1j * np.eye(n) / np.sqrt(n))
    basis = np.array(out).reshape(-1, n, n)
    basis.setflags(write=False)
    return basis


class VectorizedProblem:
    """Real coordinates on a block algebra of skew-Hermitian blocks.

    ``traceless=True`` restricts to su(n) blocks.  The cubic equation itself
    needs u(n): for traceless ``Y`` the solution ``X`` generally has a trace,
    since ``Tr(P X P)`` need not vanish.
    """

    def __init__(self, shape: BlockShape, traceless: bool = True):
        self.shape = shape
        self.traceless = traceless
        self._runs = [(count, gell_mann_basis(n, traceless)) for count, n in shape.runs]
        # flattened (m, n*n) copies for matrix-product coordinate transforms
        self._flat = [B.reshape(len(B), -1) for _, B in self._runs]
        self._flat_conj = [F.conj() for F in self._flat]
        self.dim = sum(count * len(b) for count, b in self._runs)

    def coordinates(self, A: AlgebraElement) -> np.ndarray:
        if A.shape != self.shape:
            raise ValueError(f"shape mismatch: {A.shape} vs {self.shape}")
        parts = [
            (g.reshape(len(g), -1) @ Fc.T).real.ravel()
            for Fc, g in zip(self._flat_conj, A.groups)
        ]
        return np.concatenate(parts)

    def element(self, v) -> AlgebraElement:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}")
        groups, pos = [], 0
        for (count, B), F in zip(self._runs, self._flat):
            m, n = len(B), B.shape[-1]
            c = v[pos : pos + count * m].reshape(count, m)
            groups.append((c @ F).reshape(count, n, n))
            pos += count * m
        return AlgebraElement(self.shape, groups)

    def basis(self):
        """Yield the basis elements in coordinate order."""
        for k, (count, B) in enumerate(self._runs):
            for b in range(count):
                for E in B:
                    groups = [np.zeros((c, n, n), complex) for c, n in self.shape.runs]
                    groups[k][b] = E
                    yield AlgebraElement(self.shape, groups)

    def gram(self) -> np.ndarray:
        return np.array([self.coordinates(E) for E in self.basis()])

    def matrix_of(self, fn) -> np.ndarray:
        """Dense matrix of a linear map on the algebra, built column by column."""
        return np.column_stack([self.coordinates(fn(E)) for E in self.basis()])


def assemble_operator_matrix(L: LinearOperator) -> np.ndarray:
    vp = VectorizedProblem(L.shape)
    if vp.dim > ASSEMBLY_MAX_DIM:
        raise ValueError(f"dimension {vp.dim} exceeds the assembly guard {ASSEMBLY_MAX_DIM}")
    return vp.matrix_of(L)


def jacobian_matrix(X, L: LinearOperator, h: float, vp: VectorizedProblem = None):
    vp = vp or VectorizedProblem(X.shape, traceless=False)
    return vp.matrix_of(lambda Z: jacobian_apply(X, Z, L, h))


def fd_jacobian_error(X, Y, L: LinearOperator, h: float, eps: float = 1e-5, vp=None) -> float:
    """Relative error of the assembled Jacobian against central differences of the residual."""
    vp = vp or VectorizedProblem(X.shape, traceless=False)
    J = jacobian_matrix(X, L, h, vp)
    x = vp.coordinates(X)
    cols = []
    for i in range(vp.dim):
        e = np.zeros(vp.dim)
        e[i] = eps
        fp = vp.coordinates(residual(vp.element(x + e), Y, L, h))
        fm = vp.coordinates(residual(vp.element(x - e), Y, L, h))
        cols.append((fp - fm) / (2 * eps))
    J_fd = np.column_stack(cols)
    return float(np.linalg.norm(J - J_fd) / np.linalg.norm(J))


def oracle_solve(Y, L: LinearOperator, h: float, tol: float = 1e-12, max_steps: int = 50):
    """Exact Newton on the coordinate residual, started from ``X = Y``."""
    vp = VectorizedProblem(Y.shape, traceless=False)
    if vp.dim > ORACLE_MAX_DIM:
        raise ValueError(f"dimension {vp.dim} exceeds the oracle guard {ORACLE_MAX_DIM}")
    if h == 0:
        return Y
    fd_err = fd_jacobian_error(Y, Y, L, h, vp=vp)
    if fd_err > 1e-7:
        raise OracleError(f"Jacobian disagrees with finite differences: {fd_err:.3e}")
    x = vp.coordinates(Y)
    scale = max(1.0, frobenius_norm(Y))
    for _ in range(max_steps):
        X = vp.element(x)
        F = residual(X, Y, L, h)
        if frobenius_norm(F) <= tol * scale:
            return X
        J = jacobian_matrix(X, L, h, vp)
        x = x - np.linalg.solve(J, vp.coordinates(F))
        if not np.all(np.isfinite(x)):
            break
    raise OracleError(f"dense Newton did not converge in {max_steps} steps")
