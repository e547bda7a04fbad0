"""The three benchmark models: operator construction and random initial data."""
from __future__ import annotations

from .algebra import BlockShape, random_normalized
from .operators import DriftAlfvenOperator, EulerSphereOperator, SpinChainOperator

MODELS = ("euler", "alfven", "chain")

# default matrix sizes / particle counts for benchmark sweeps
N_LADDER = (3, 5, 9, 17, 33, 65, 129, 257, 513, 1025)

DEFAULT_LAMBDA = 5.0

# Frobenius norm of each random spin.  Spins of this size put the linear
# scheme at 20-40 iterations for h = 0.5 and below 16 for h = 0.1.
CHAIN_SPIN_NORM = 0.5


def make_operator(model: str, N: int, lam: float = DEFAULT_LAMBDA, dx: float = 1.0):
    if model == "euler":
        return EulerSphereOperator(N)
    if model == "alfven":
        return DriftAlfvenOperator(N, lam)
    if model == "chain":
        return SpinChainOperator(N, dx)
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def model_shape(model: str, N: int) -> BlockShape:
    if model == "euler":
        return BlockShape.uniform(N)
    if model == "alfven":
        return BlockShape.uniform(N, 2)
    if model == "chain":
        return BlockShape.uniform(2, N)
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def initial_value(model: str, N: int, seed: int):
    """Normalized random right-hand side ``Y`` for one benchmark run.

    su(N) models get a unit-norm element; spin chains get independent spins of
    norm :data:`CHAIN_SPIN_NORM` each.
    """
    shape = model_shape(model, N)
    if model == "chain":
        return CHAIN_SPIN_NORM * random_normalized(shape, seed, per_block=True)
    return random_normalized(shape, seed)
