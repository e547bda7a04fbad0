"""Self-adjoint linear operators on block algebras.

The quantized Laplacian on su(N) is the double commutator
``sum_a [X_a, [X_a, W]]`` with ``X_a`` the skew-Hermitian generators of the
N-dimensional irreducible representation of su(2), ``[X_1, X_2] = X_3``.  Its
eigenvalues are ``-l(l+1)`` with multiplicity ``2l + 1`` for ``l = 0..N-1``.

Matrix entries ``W[j, j+m]`` on a fixed diagonal ``m`` only couple to each
other, through a symmetric tridiagonal matrix.  Solves therefore reduce to one
banded Cholesky solve over all off-diagonals plus a small dense solve on the
main diagonal, which carries the kernel (the identity matrix).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, BlockShape, frobenius_inner, frobenius_norm
from .algebra import random_normalized

__all__ = [
    "LinearOperator",
    "IdentityOperator",
    "ScaledOperator",
    "EulerSphereOperator",
    "QuantizedLaplacian",
    "DriftAlfvenOperator",
    "SpinChainOperator",
    "su2_generators",
    "euler_laplacian_apply",
    "euler_laplacian_solve",
    "drift_alfven_apply",
    "spin_chain_apply",
    "operator_norm",
    "self_adjoint_defect",
]


class LinearOperator:
    """Linear map on elements of a fixed :class:`BlockShape`."""

    label = "operator"

    def __init__(self, shape: BlockShape):
        self.shape = shape

    def apply(self, A: AlgebraElement) -> AlgebraElement:
        raise NotImplementedError

    def __call__(self, A: AlgebraElement) -> AlgebraElement:
        if A.shape != self.shape:
            raise ValueError(f"{self.label} acts on {self.shape}, got {A.shape}")
        return self.apply(A)

    def __repr__(self):
        return f"{type(self).__name__}({self.label})"


class IdentityOperator(LinearOperator):
    label = "identity"

    def apply(self, A):
        return A


class ScaledOperator(LinearOperator):
    """``c * base``; with ``base=None`` this is ``c`` times the identity."""

    def __init__(self, shape: BlockShape, factor: float, base: LinearOperator = None):
        super().__init__(shape)
        self.factor = float(factor)
        self.base = base
        self.label = f"{factor:g}*{base.label if base else 'identity'}"

    def apply(self, A):
        out = A if self.base is None else self.base(A)
        return self.factor * out


# --- quantized Laplacian ----------------------------------------------------


def su2_generators(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Skew-Hermitian spin-(N-1)/2 generators with ``[X1, X2] = X3`` cyclic."""
    s = (N - 1) / 2
    mu = s - np.arange(N)
    # J+ |mu> = sqrt(s(s+1) - mu(mu+1)) |mu+1>, and |mu+1> has index i-1
    a = np.sqrt(s * (s + 1) - mu * (mu + 1))
    jp = np.diag(a[1:], 1).astype(complex)
    jm = jp.T.copy()
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(mu).astype(complex)
    return -1j * jx, -1j * jy, -1j * jz


class _Laplacian:
    """Per-N data for applying and inverting the quantized Laplacian."""

    def __init__(self, N: int):
        self.N = N
        s = (N - 1) / 2
        mu = s - np.arange(N)
        a = np.sqrt(np.maximum(s * (s + 1) - mu * (mu + 1), 0.0))
        self.casimir = s * (s + 1)
        self.diag = -2.0 * (self.casimir - np.outer(mu, mu))
        # coupling of W[j, k] with W[j+1, k+1]
        a_next = np.append(a[1:], 0.0)
        self.coupling = np.outer(a_next, a_next)[: N - 1, : N - 1]

        # off-diagonal entries ordered diagonal by diagonal
        rows, cols, links = [], [], []
        for m in range(-(N - 1), N):
            if m == 0:
                continue
            j = np.arange(max(0, -m), min(N, N - m))
            rows.append(j)
            cols.append(j + m)
            link = self.coupling[j[:-1], j[:-1] + m] if len(j) > 1 else np.empty(0)
            links.append(np.append(link, 0.0))
        self.rows = np.concatenate(rows) if rows else np.empty(0, int)
        self.cols = np.concatenate(cols) if cols else np.empty(0, int)
        self.off_diag = self.diag[self.rows, self.cols]
        # zero links separate consecutive diagonals in the banded system
        self.off_link = np.concatenate(links)[:-1] if links else np.empty(0)
        self.main_matrix = (
            np.diag(np.diag(self.diag))
            + np.diag(np.diag(self.coupling), 1)
            + np.diag(np.diag(self.coupling), -1)
        )
        self._chol = {}
        self._main_inv = {}

    def apply(self, g: np.ndarray) -> np.ndarray:
        """Laplacian of a ``(count, N, N)`` stack."""
        out = self.diag * g
        c = self.coupling
        out[:, :-1, :-1] += c * g[:, 1:, 1:]
        out[:, 1:, 1:] += c * g[:, :-1, :-1]
        return out

    def _factors(self, shift):
        if shift not in self._chol:
            n = len(self.off_diag)
            ab = np.zeros((2, n))
            ab[0, 1:] = -self.off_link
            ab[1] = -(self.off_diag - shift)
            chol = scipy.linalg.cholesky_banded(ab, lower=False) if n else ab
            main = self.main_matrix - shift * np.eye(self.N)
            if shift == 0.0:
                # kernel is the all-ones vector (the identity matrix)
                inv = np.linalg.pinv(main, hermitian=True)
            else:
                inv = np.linalg.inv(main)
            self._chol[shift] = chol
            self._main_inv[shift] = inv
        return self._chol[shift], self._main_inv[shift]

    def solve(self, g: np.ndarray, shift: float = 0.0) -> np.ndarray:
        """Solve ``(Laplacian - shift) P = g`` for a ``(count, N, N)`` stack."""
        chol, main_inv = self._factors(float(shift))
        count = g.shape[0]
        out = np.empty_like(g)
        if len(self.off_diag):
            rhs = g[:, self.rows, self.cols].T
            rhs = np.concatenate([rhs.real, rhs.imag], axis=1)
            sol = -scipy.linalg.cho_solve_banded((chol, False), rhs, check_finite=False)
            out[:, self.rows, self.cols] = (sol[:, :count] + 1j * sol[:, count:]).T
        d = np.einsum("ij,bj->bi", main_inv, np.diagonal(g, axis1=1, axis2=2))
        idx = np.arange(self.N)
        out[:, idx, idx] = d
        return out


@lru_cache(maxsize=32)
def _laplacian(N: int) -> _Laplacian:
    return _Laplacian(N)


def _single_block(W: AlgebraElement) -> int:
    sizes = W.shape.block_sizes
    if len(set(sizes)) != 1:
        raise ValueError(f"expected equal-size blocks, got {W.shape}")
    return sizes[0]


def euler_laplacian_apply(W: AlgebraElement) -> AlgebraElement:
    N = _single_block(W)
    lap = _laplacian(N)
    return W.map(lap.apply)


def _check_traceless(W: AlgebraElement, tol=1e-9):
    tr = np.abs(W.trace()).max()
    if tr > tol * max(frobenius_norm(W), 1.0):
        raise ValueError(f"input has nonzero trace {tr:.3e}; the Laplacian is singular there")


def euler_laplacian_solve(W: AlgebraElement, shift: float = 0.0) -> AlgebraElement:
    """Solve ``(Laplacian - shift) P = W`` for traceless ``W``."""
    N = _single_block(W)
    if shift == 0.0:
        _check_traceless(W)
    lap = _laplacian(N)
    return W.map(lambda g: lap.solve(g, shift))


class EulerSphereOperator(LinearOperator):
    """``W -> Laplacian^{-1} W`` on su(N): the stream matrix of a vorticity matrix."""

    def __init__(self, N: int):
        if N < 2:
            raise ValueError("EulerSphereOperator needs N >= 2")
        super().__init__(BlockShape.uniform(N))
        self.N = N
        self.label = f"euler(N={N})"
        self._lap = _laplacian(N)
        self._lap._factors(0.0)

    def apply(self, W):
        return W.map(self._lap.solve)

    def laplacian(self, W):
        """The Laplacian itself (the inverse of this operator on su(N))."""
        if W.shape != self.shape:
            raise ValueError(f"{self.label} acts on {self.shape}, got {W.shape}")
        return W.map(self._lap.apply)


class QuantizedLaplacian(LinearOperator):
    """The Laplacian itself on su(N); negative definite, spectrum ``-l(l+1)``."""

    def __init__(self, N: int):
        if N < 2:
            raise ValueError("QuantizedLaplacian needs N >= 2")
        super().__init__(BlockShape.uniform(N))
        self.N = N
        self.label = f"laplacian(N={N})"
        self._lap = _laplacian(N)

    def apply(self, W):
        return W.map(self._lap.apply)


def drift_alfven_apply(W_plus: AlgebraElement, W_minus: AlgebraElement, lam: float):
    """Return ``(F_plus, F_minus)`` for the two generalized vorticities."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    W_plus._check(W_minus)
    F = euler_laplacian_solve(W_plus + W_minus)
    P = euler_laplacian_solve((W_plus - W_minus) / lam, shift=1.0 / lam**2)
    return F + P / lam, F - P / lam


class DriftAlfvenOperator(LinearOperator):
    """Operator on su(N) + su(N) returning ``(F_+, F_-)``."""

    def __init__(self, N: int, lam: float = 5.0):
        if lam <= 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        super().__init__(BlockShape.uniform(N, 2))
        self.N = N
        self.lam = float(lam)
        self.label = f"alfven(N={N}, lambda={lam:g})"
        self._lap = _laplacian(N)
        self._lap._factors(0.0)
        self._lap._factors(1.0 / self.lam**2)

    def apply(self, W):
        (g,) = W.groups
        lam = self.lam
        F = self._lap.solve((g[0] + g[1])[None])[0]
        P = self._lap.solve(((g[0] - g[1]) / lam)[None], 1.0 / lam**2)[0]
        return AlgebraElement(self.shape, [np.stack([F + P / lam, F - P / lam])])


def spin_chain_apply(S: AlgebraElement, dx: float = 1.0) -> AlgebraElement:
    """Nearest-neighbour sum ``(S_{i-1} + S_{i+1}) / dx^2`` with periodic indices."""
    if S.shape.n_blocks < 3 or set(S.shape.block_sizes) != {2}:
        raise ValueError(f"spin chain needs at least 3 blocks of size 2, got {S.shape}")
    return S.map(lambda g: (np.roll(g, 1, axis=0) + np.roll(g, -1, axis=0)) / dx**2)


class SpinChainOperator(LinearOperator):
    def __init__(self, N: int, dx: float = 1.0):
        if N < 3:
            raise ValueError(f"spin chain needs N >= 3 particles, got {N}")
        super().__init__(BlockShape.uniform(2, N))
        self.N = N
        self.dx = float(dx)
        self.label = f"chain(N={N}, dx={dx:g})"

    def apply(self, S):
        return spin_chain_apply(S, self.dx)


def operator_norm(L: LinearOperator, seed: int = 0, iters: int = 200, rtol: float = 1e-10) -> float:
    """Power-iteration estimate of the Frobenius-induced norm of self-adjoint ``L``.

    Returns ``||L v||`` for the last normalized iterate ``v``, i.e. the square
    root of the Rayleigh quotient of ``L^2``.  This stays correct when ``L`` has
    eigenvalues ``+r`` and ``-r`` of equal magnitude.  The estimate approaches
    the norm from below; convergence is not certified.
    """
    v = random_normalized(L.shape, seed)
    est = 0.0
    for _ in range(iters):
        w = L(v)
        new = frobenius_norm(w)
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= rtol * new:
            return new
        est = new
    return est


def self_adjoint_defect(L: LinearOperator, seed: int = 0) -> float:
    """``|<LA, B> - <A, LB>| / (||A|| ||B||)`` on random elements."""
    A = random_normalized(L.shape, seed)
    B = random_normalized(L.shape, seed + 1)
    return abs(frobenius_inner(L(A), B) - frobenius_inner(A, L(B)))
