import numpy as np
import numpy.testing as npt
import pytest

from isocubic.algebra import BlockShape, frobenius_norm
from isocubic.models import initial_value, make_operator
from isocubic.operators import IdentityOperator, QuantizedLaplacian
from isocubic.oracle import (
    OracleError,
    VectorizedProblem,
    assemble_operator_matrix,
    fd_jacobian_error,
    gell_mann_basis,
    oracle_solve,
)
from isocubic.solvers import SolverConfig, residual, solve


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("traceless", [True, False])
def test_gell_mann_orthonormal(n, traceless):
    B = gell_mann_basis(n, traceless)
    assert len(B) == n * n - (1 if traceless else 0)
    gram = np.einsum("aij,bij->ab", B.conj(), B).real
    npt.assert_allclose(gram, np.eye(len(B)), atol=1e-12)
    npt.assert_allclose(B + B.conj().transpose(0, 2, 1), 0.0, atol=1e-15)


def test_vectorized_round_trip():
    shape = BlockShape([2, 2, 3])
    vp = VectorizedProblem(shape)
    assert vp.dim == 3 + 3 + 8
    npt.assert_allclose(vp.gram(), np.eye(vp.dim), atol=1e-12)
    Y = initial_value("chain", 4, 0)
    vp = VectorizedProblem(Y.shape)
    assert frobenius_norm(vp.element(vp.coordinates(Y)) - Y) <= 1e-13


def test_assembly():
    shape = BlockShape.uniform(3)
    npt.assert_allclose(assemble_operator_matrix(IdentityOperator(shape)), np.eye(8), atol=1e-15)
    M = assemble_operator_matrix(make_operator("alfven", 4))
    assert np.abs(M - M.T).max() <= 1e-10
    with pytest.raises(ValueError):
        assemble_operator_matrix(QuantizedLaplacian(64))


def test_oracle_h_zero():
    L = make_operator("euler", 5)
    Y = initial_value("euler", 5, 0)
    assert oracle_solve(Y, L, 0.0) is Y


def test_oracle_guard():
    L = make_operator("euler", 15)
    with pytest.raises(ValueError):
        oracle_solve(initial_value("euler", 15, 0), L, 0.1)


def test_oracle_nonconvergence_raises():
    L = make_operator("euler", 3)
    Y = 1e3 * initial_value("euler", 3, 0)
    with pytest.raises(OracleError):
        oracle_solve(Y, L, 5.0, max_steps=3)


@pytest.mark.parametrize("model,N", [("euler", 5), ("alfven", 3), ("chain", 6)])
def test_fd_jacobian(model, N):
    L = make_operator(model, N)
    X = initial_value(model, N, 1)
    Y = initial_value(model, N, 2)
    assert fd_jacobian_error(X, Y, L, 0.3) <= 1e-7


@pytest.mark.parametrize("N", [3, 5, 9])
@pytest.mark.parametrize("seed", range(5))
def test_cross_validation_euler(N, seed):
    L = make_operator("euler", N)
    Y = initial_value("euler", N, seed)
    Xo = oracle_solve(Y, L, 0.3)
    assert frobenius_norm(residual(Xo, Y, L, 0.3)) <= 1e-12
    for method in ("linear", "newton"):
        X, rep = solve(Y, L, SolverConfig(h=0.3), method)
        assert rep.converged
        assert frobenius_norm(X - Xo) <= 1e-9
