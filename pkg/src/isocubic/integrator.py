"""Two-stage isospectral Lie-Poisson time stepper.

One step from ``Y_n``:

    solve   (I - h L X_n) X_n (I + h L X_n) = Y_n        (implicit half)
    set     Y_{n+1} = (I + h L X_n) X_n (I - h L X_n)     (explicit half)

``Y_{n+1}`` is a unitary conjugate of ``Y_n`` (by the Cayley transform of
``h L X_n``), so spectra are preserved up to the inner solver tolerance.

Subtracting the two lines gives ``Y_{n+1} - Y_n = 2h [L X_n, X_n]``: one step
advances the flow ``dY/dt = [LY, Y]`` by time ``2h``.  Recorded times use
that convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import AlgebraElement, frobenius_norm, hermitian_eigenvalues
from .algebra import spectral_distance, triple_product
from .operators import LinearOperator
from .solvers import SolverConfig, SolverReport, solve

__all__ = [
    "IntegratorConfig",
    "TrajectoryDiagnostics",
    "StepFailure",
    "step",
    "hamiltonian",
    "run",
    "conjugacy_check",
    "midpoint_defect",
]


@dataclass
class IntegratorConfig:
    h: float
    n_steps: int
    solver: str = "linear"
    solver_cfg: Optional[SolverConfig] = None
    record_every: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.solver not in ("explicit", "linear", "newton"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.solver_cfg is None:
            self.solver_cfg = SolverConfig(h=self.h)
        elif self.solver_cfg.h != self.h:
            raise ValueError("solver_cfg.h must equal the integrator step h")


@dataclass
class TrajectoryDiagnostics:
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    hamiltonian: list = field(default_factory=list)
    spectra: list = field(default_factory=list)
    spectral_drift: list = field(default_factory=list)
    solver_iterations: list = field(default_factory=list)

    def record(self, n, t, H, spec, drift, iters):
        self.steps.append(n)
        self.times.append(t)
        self.hamiltonian.append(H)
        self.spectra.append(spec)
        self.spectral_drift.append(drift)
        self.solver_iterations.append(iters)

    def relative_energy_drift(self) -> np.ndarray:
        H = np.asarray(self.hamiltonian)
        return np.abs(H - H[0]) / abs(H[0])


class StepFailure(RuntimeError):
    """Inner solver failed; carries the report, step index and partial diagnostics."""

    def __init__(self, step_index: int, report: SolverReport, diagnostics=None):
        self.step_index = step_index
        self.report = report
        self.diagnostics = diagnostics
        super().__init__(f"inner solve failed at step {step_index}: {report.summary()}")


def step(Y_n: AlgebraElement, L: LinearOperator, cfg: IntegratorConfig):
    """Advance one step; returns ``(Y_next, X_n, report)``."""
    X, report = solve(Y_n, L, cfg.solver_cfg, cfg.solver)
    if not report.converged:
        raise StepFailure(0, report)
    Y_next = triple_product(L(X), X, -cfg.h)
    return Y_next, X, report


def hamiltonian(Y: AlgebraElement, L: LinearOperator) -> float:
    """``H(Y) = 1/2 sum_i Tr(Y_i (LY)_i)``; negative semidefinite for positive ``L``."""
    LY = L(Y)
    return 0.5 * float(
        sum(np.einsum("bij,bji->", y, ly).real for y, ly in zip(Y.groups, LY.groups))
    )


def run(Y_0: AlgebraElement, L: LinearOperator, cfg: IntegratorConfig) -> TrajectoryDiagnostics:
    """Integrate ``n_steps`` steps, recording every ``record_every``-th state.

    Step 0 is always recorded.  On inner non-convergence a :class:`StepFailure`
    is raised with ``step_index`` set to the step being attempted and the
    diagnostics gathered so far attached.
    """
    diag = TrajectoryDiagnostics()
    spec0 = hermitian_eigenvalues(Y_0)
    diag.record(0, 0.0, hamiltonian(Y_0, L), spec0, 0.0, 0)
    Y = Y_0
    for n in range(1, cfg.n_steps + 1):
        try:
            Y, _, report = step(Y, L, cfg)
        except StepFailure as exc:
            raise StepFailure(n, exc.report, diag) from None
        if n % cfg.record_every == 0:
            spec = hermitian_eigenvalues(Y)
            diag.record(
                n,
                2 * n * cfg.h,
                hamiltonian(Y, L),
                spec,
                spectral_distance(spec, spec0),
                report.iterations,
            )
    return diag


def conjugacy_check(Y_n: AlgebraElement, L: LinearOperator, cfg: IntegratorConfig) -> float:
    """Defect of ``phi_M = chi o phi_T o chi^{-1}`` at ``Y_n``.

    ``chi(X) = (I - hLX) X (I + hLX)`` maps the X-iterates of the scheme onto
    the Y-iterates.  ``phi_M(Y_n) = Y_{n+1}`` is one full step;
    ``phi_T(X_n) = X_{n+1}`` is obtained by solving the implicit half again at
    ``Y_{n+1}``.  The returned norm is ``||Y_{n+1} - chi(X_{n+1})||``.
    """
    if cfg.h == 0:
        return 0.0
    Y_next, _, _ = step(Y_n, L, cfg)
    X_next, report = solve(Y_next, L, cfg.solver_cfg, cfg.solver)
    if not report.converged:
        raise StepFailure(1, report)
    chi = triple_product(L(X_next), X_next, cfg.h)
    return frobenius_norm(Y_next - chi)


def midpoint_defect(Y_n: AlgebraElement, L: LinearOperator, cfg: IntegratorConfig) -> float:
    """``||Y_{n+1} - Y_n - 2h [L M, M]||`` with ``M`` the midpoint of the step.

    The factor 2 is the time step of one scheme step; the defect is ``O(h^3)``.
    """
    Y_next, _, _ = step(Y_n, L, cfg)
    M = (Y_next + Y_n) / 2
    LM = L(M)
    return frobenius_norm(Y_next - Y_n - 2 * cfg.h * (LM @ M - M @ LM))
