"""Block direct-sum matrix algebra.

An :class:`AlgebraElement` is a tuple of square complex blocks.  Consecutive
blocks of equal size are stored together as one ``(count, n, n)`` array so
that products of the many tiny 2x2 blocks of a spin chain run as a single
batched numpy call.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from numbers import Number

import numpy as np
import scipy.linalg

__all__ = [
    "BlockShape",
    "AlgebraElement",
    "LUFactors",
    "SingularBlockError",
    "commutator",
    "triple_product",
    "frobenius_inner",
    "frobenius_norm",
    "project_skew",
    "project_traceless",
    "closure_defect",
    "lu_factor",
    "hermitian_eigenvalues",
    "spectral_distance",
    "random_normalized",
]


@dataclass(frozen=True)
class BlockShape:
    block_sizes: tuple[int, ...]

    def __init__(self, block_sizes):
        sizes = tuple(int(n) for n in block_sizes)
        if not sizes:
            raise ValueError("a BlockShape needs at least one block")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @classmethod
    def uniform(cls, n: int, count: int = 1) -> "BlockShape":
        return cls((n,) * count)

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def runs(self) -> tuple[tuple[int, int], ...]:
        """``(count, size)`` for each maximal run of equal block sizes."""
        return tuple((len(list(g)), n) for n, g in groupby(self.block_sizes))

    @property
    def dim(self) -> int:
        """Real dimension of the traceless skew-Hermitian subspace."""
        return sum(n * n - 1 for n in self.block_sizes)

    def __repr__(self):
        return f"BlockShape({list(self.block_sizes)})"


class AlgebraElement:
    """Immutable element of a block direct sum of square complex matrices."""

    __slots__ = ("shape", "groups")

    def __init__(self, shape: BlockShape, groups):
        groups = tuple(np.asarray(g, dtype=np.complex128) for g in groups)
        runs = shape.runs
        if len(groups) != len(runs) or any(
            g.shape != (c, n, n) for g, (c, n) in zip(groups, runs)
        ):
            raise ValueError(
                f"group arrays {[g.shape for g in groups]} do not match {shape}"
            )
        for g in groups:
            g.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "groups", groups)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    # construction ---------------------------------------------------------

    @classmethod
    def from_blocks(cls, blocks) -> "AlgebraElement":
        blocks = [np.array(b, dtype=np.complex128) for b in blocks]
        for i, b in enumerate(blocks):
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ValueError(f"block {i} is not square: {b.shape}")
        shape = BlockShape([b.shape[0] for b in blocks])
        groups, start = [], 0
        for count, _ in shape.runs:
            groups.append(np.stack(blocks[start : start + count]))
            start += count
        return cls(shape, groups)

    @classmethod
    def from_matrix(cls, A) -> "AlgebraElement":
        return cls.from_blocks([A])

    @classmethod
    def zeros(cls, shape: BlockShape) -> "AlgebraElement":
        return cls(shape, [np.zeros((c, n, n), complex) for c, n in shape.runs])

    @classmethod
    def identity(cls, shape: BlockShape) -> "AlgebraElement":
        return cls(
            shape,
            [np.broadcast_to(np.eye(n), (c, n, n)).copy() for c, n in shape.runs],
        )

    # access ---------------------------------------------------------------

    @property
    def blocks(self) -> list[np.ndarray]:
        return [b for g in self.groups for b in g]

    def block(self, i: int) -> np.ndarray:
        return self.blocks[i]

    def map(self, fn) -> "AlgebraElement":
        """Apply ``fn`` to every ``(count, n, n)`` group array."""
        return AlgebraElement(self.shape, [fn(g) for g in self.groups])

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def _zip(self, other, op):
        self._check(other)
        return AlgebraElement(
            self.shape, [op(a, b) for a, b in zip(self.groups, other.groups)]
        )

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return self._zip(other, np.add)

    def __sub__(self, other):
        return self._zip(other, np.subtract)

    def __matmul__(self, other):
        """Blockwise matrix product."""
        return self._zip(other, np.matmul)

    def __neg__(self):
        return self.map(np.negative)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return self.map(lambda g: c * g)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return self.map(lambda g: g / c)

    def dagger(self) -> "AlgebraElement":
        return self.map(lambda g: g.conj().transpose(0, 2, 1))

    def trace(self) -> np.ndarray:
        return np.concatenate([np.trace(g, axis1=1, axis2=2) for g in self.groups])

    def is_finite(self) -> bool:
        return all(np.isfinite(g).all() for g in self.groups)

    def allclose(self, other, atol=1e-12) -> bool:
        return frobenius_norm(self - other) <= atol

    def __repr__(self):
        return f"AlgebraElement({self.shape}, norm={frobenius_norm(self):.6g})"


def commutator(A: AlgebraElement, B: AlgebraElement) -> AlgebraElement:
    return A @ B - B @ A


def triple_product(P: AlgebraElement, X: AlgebraElement, h: float) -> AlgebraElement:
    """Blockwise ``(I - hP) X (I + hP)``."""
    P._check(X)
    out = []
    for p, x in zip(P.groups, X.groups):
        px = p @ x
        xp = x @ p
        out.append(x + h * (xp - px) - (h * h) * (px @ p))
    return AlgebraElement(X.shape, out)


def frobenius_inner(A: AlgebraElement, B: AlgebraElement) -> float:
    """Real pairing ``Re sum_i Tr(A_i^* B_i)``."""
    A._check(B)
    return float(sum(np.vdot(a, b).real for a, b in zip(A.groups, B.groups)))


def frobenius_norm(A: AlgebraElement) -> float:
    return float(np.sqrt(sum(np.vdot(g, g).real for g in A.groups)))


def project_skew(A: AlgebraElement) -> AlgebraElement:
    return A.map(lambda g: 0.5 * (g - g.conj().transpose(0, 2, 1)))


def project_traceless(A: AlgebraElement) -> AlgebraElement:
    def _proj(g):
        n = g.shape[-1]
        tr = np.trace(g, axis1=1, axis2=2) / n
        return g - tr[:, None, None] * np.eye(n)

    return A.map(_proj)


def closure_defect(A: AlgebraElement) -> float:
    """Distance of ``A`` from the traceless skew-Hermitian subspace."""
    skew_part = frobenius_norm(A + A.dagger()) / 2
    return max(skew_part, float(np.abs(A.trace()).max()))


class SingularBlockError(ValueError):
    def __init__(self, block: int, msg: str = ""):
        self.block = block
        super().__init__(msg or f"factor (I - hP) is singular in block {block}")


# Dense LU with row pivoting.  Groups with many small blocks (spin chains) use a
# numpy kernel vectorized over the block axis; large blocks go through LAPACK.
_BATCHED_MAX_N = 8


def _lu_batched(a: np.ndarray, first_block: int):
    lu = np.array(a, dtype=np.complex128)
    m, n, _ = lu.shape
    piv = np.empty((m, n), dtype=np.intp)
    rows = np.arange(m)
    scale = np.abs(lu).max(axis=(1, 2))
    for k in range(n):
        p = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        piv[:, k] = p
        top = lu[rows, k, :].copy()
        lu[rows, k, :] = lu[rows, p, :]
        lu[rows, p, :] = top
        pivot = lu[:, k, k]
        bad = np.abs(pivot) <= np.finfo(float).eps * n * scale
        if bad.any():
            raise SingularBlockError(first_block + int(np.argmax(bad)))
        lu[:, k + 1 :, k] /= pivot[:, None]
        lu[:, k + 1 :, k + 1 :] -= lu[:, k + 1 :, k, None] * lu[:, k, None, k + 1 :]
    return lu, piv


def _swap_rows(b, piv, order):
    rows = np.arange(b.shape[0])
    for k in order:
        p = piv[:, k]
        top = b[rows, k].copy()
        b[rows, k] = b[rows, p]
        b[rows, p] = top


def _lu_solve_batched(lu, piv, b, adjoint):
    x = np.array(b, dtype=np.complex128)
    n = lu.shape[-1]
    if not adjoint:
        _swap_rows(x, piv, range(n))
        for i in range(1, n):
            x[:, i] -= np.einsum("bj,bjr->br", lu[:, i, :i], x[:, :i])
        for i in range(n - 1, -1, -1):
            x[:, i] -= np.einsum("bj,bjr->br", lu[:, i, i + 1 :], x[:, i + 1 :])
            x[:, i] /= lu[:, i, i, None]
        return x
    # A^* = U^* L^* P
    luh = lu.conj()
    for i in range(n):
        x[:, i] -= np.einsum("bj,bjr->br", luh[:, :i, i], x[:, :i])
        x[:, i] /= luh[:, i, i, None]
    for i in range(n - 2, -1, -1):
        x[:, i] -= np.einsum("bj,bjr->br", luh[:, i + 1 :, i], x[:, i + 1 :])
    _swap_rows(x, piv, range(n - 1, -1, -1))
    return x


def _lu_lapack(a: np.ndarray, first_block: int):
    lus, pivs = [], []
    for j, blk in enumerate(a):
        lu, piv = scipy.linalg.lu_factor(blk, check_finite=False)
        d = np.abs(np.diag(lu))
        if d.min() <= np.finfo(float).eps * blk.shape[0] * max(np.abs(blk).max(), 1e-300):
            raise SingularBlockError(first_block + j)
        lus.append(lu)
        pivs.append(piv)
    return np.stack(lus), np.stack(pivs)


def _lu_solve_lapack(lu, piv, b, adjoint):
    trans = 2 if adjoint else 0
    return np.stack(
        [
            scipy.linalg.lu_solve((l, p), rhs, trans=trans, check_finite=False)
            for l, p, rhs in zip(lu, piv, b)
        ]
    )


def _factor_group(a, first_block):
    if a.shape[-1] <= _BATCHED_MAX_N:
        return ("batched",) + _lu_batched(a, first_block)
    return ("lapack",) + _lu_lapack(a, first_block)


def _solve_group(fac, b, adjoint):
    kind, lu, piv = fac
    if kind == "batched":
        return _lu_solve_batched(lu, piv, b, adjoint)
    return _lu_solve_lapack(lu, piv, b, adjoint)


class LUFactors:
    """Pivoted LU factors of ``I - hP`` for every block.

    When ``P`` is skew-Hermitian, ``(I - hP)^* = I + hP`` so systems with
    ``I + hP`` are solved with the same factors by a conjugate-transpose solve
    (``adjoint_identity`` is True and only one factorization per block exists).
    Otherwise ``I + hP`` is factored separately.
    """

    def __init__(self, P: AlgebraElement, h: float, skew_tol: float = 1e-12):
        self.shape = P.shape
        self.h = float(h)
        scale = max(frobenius_norm(P), 1.0)
        self.adjoint_identity = frobenius_norm(P + P.dagger()) <= skew_tol * scale
        eye = AlgebraElement.identity(P.shape)
        self._minus = self._factor(eye - self.h * P)
        self._plus = None if self.adjoint_identity else self._factor(eye + self.h * P)
        self.n_factorizations = P.shape.n_blocks * (1 if self.adjoint_identity else 2)

    @staticmethod
    def _factor(A):
        facs, start = [], 0
        for g in A.groups:
            facs.append(_factor_group(g, start))
            start += g.shape[0]
        return facs

    def _solve(self, facs, B, adjoint):
        if B.shape != self.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {B.shape}")
        return AlgebraElement(
            self.shape, [_solve_group(f, b, adjoint) for f, b in zip(facs, B.groups)]
        )

    def solve_minus(self, B: AlgebraElement) -> AlgebraElement:
        """Solve ``(I - hP) Z = B`` blockwise."""
        return self._solve(self._minus, B, adjoint=False)

    def solve_plus(self, B: AlgebraElement) -> AlgebraElement:
        """Solve ``(I + hP) Z = B`` blockwise."""
        if self.adjoint_identity:
            return self._solve(self._minus, B, adjoint=True)
        return self._solve(self._plus, B, adjoint=False)

    def solve_plus_adjoint(self, B: AlgebraElement) -> AlgebraElement:
        """Solve ``(I + hP)^* Z = B``; this is ``I - hP`` for skew-Hermitian P."""
        if self.adjoint_identity:
            return self.solve_minus(B)
        return self._solve(self._plus, B, adjoint=True)

    def reconstruct(self) -> AlgebraElement:
        """Rebuild ``I - hP`` from the stored factors."""
        out = []
        for kind, lu, piv in self._minus:
            n = lu.shape[-1]
            lower = np.tril(lu, -1) + np.eye(n)
            a = lower @ np.triu(lu)
            # undo the row interchanges in reverse order
            _swap_rows(a, piv, range(n - 1, -1, -1))
            out.append(a)
        return AlgebraElement(self.shape, out)


def lu_factor(P: AlgebraElement, h: float) -> LUFactors:
    return LUFactors(P, h)


def hermitian_eigenvalues(A: AlgebraElement, tol: float = 1e-8) -> list[np.ndarray]:
    """Sorted eigenvalues of the Hermitian matrices ``i A_i``, one array per block."""
    defect = frobenius_norm(A + A.dagger()) / 2
    if defect > tol * max(frobenius_norm(A), 1.0):
        raise ValueError(f"element is not skew-Hermitian (defect {defect:.3e})")
    out = []
    for g in A.groups:
        herm = 1j * g
        herm = 0.5 * (herm + herm.conj().transpose(0, 2, 1))
        out.extend(np.linalg.eigvalsh(herm))
    return out


def spectral_distance(spec_a, spec_b) -> float:
    """Largest per-eigenvalue gap between two lists of sorted block spectra."""
    return max(float(np.abs(a - b).max()) for a, b in zip(spec_a, spec_b))


def random_normalized(
    shape: BlockShape,
    seed: int,
    per_block: bool = False,
    distribution: str = "normal",
) -> AlgebraElement:
    """Random traceless skew-Hermitian element of unit Frobenius norm.

    Real and imaginary entry parts are drawn independently from numpy's PCG64
    stream seeded with ``seed``, either standard normal (``"normal"``) or
    uniform on [0, 1) (``"uniform"``).  Blocks are then projected onto the
    skew-Hermitian and traceless subspace.  With ``per_block`` every block is
    scaled to unit norm instead of the whole element.
    """
    rng = np.random.default_rng(seed)
    if distribution == "normal":
        draw = rng.standard_normal
    elif distribution == "uniform":
        draw = rng.random
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    groups = []
    for c, n in shape.runs:
        g = draw((c, n, n)) + 1j * draw((c, n, n))
        groups.append(g)
    A = project_traceless(project_skew(AlgebraElement(shape, groups)))
    if per_block:
        return A.map(lambda g: g / np.linalg.norm(g, axis=(1, 2))[:, None, None])
    return A / frobenius_norm(A)
