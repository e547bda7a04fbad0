"""Benchmark sweeps over models, matrix sizes and solvers, with CSV output."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .models import DEFAULT_LAMBDA, MODELS, N_LADDER, initial_value, make_operator
from .solvers import SOLVERS, NewtonVariant, SolverConfig, solve

__all__ = [
    "BENCH_HEADER",
    "BenchCell",
    "BenchRow",
    "run_cell",
    "make_cells",
    "run_bench",
    "write_csv",
    "format_number",
]

BENCH_HEADER = "model,N,h,solver,seeds,mean_iter,converged_frac,mean_wall_s,residual_max"
DEFAULT_BASE_SEED = 42
DEFAULT_N_SEEDS = 10


@dataclass(frozen=True)
class BenchCell:
    model: str
    N: int
    h: float
    solver: str
    seeds: tuple = tuple(range(DEFAULT_BASE_SEED, DEFAULT_BASE_SEED + DEFAULT_N_SEEDS))
    lam: float = DEFAULT_LAMBDA
    tol: float = 1e-10
    max_iter: int = 500
    newton_variant: str = "V2"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.model == "chain" and self.N < 3:
            raise ValueError("spin chains need N >= 3")
        if self.model != "chain" and self.N < 2:
            raise ValueError("su(N) models need N >= 2")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        NewtonVariant(self.newton_variant)


@dataclass
class BenchRow:
    cell: BenchCell
    iterations: list = field(default_factory=list)
    converged: list = field(default_factory=list)
    wall_s: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    @property
    def converged_frac(self) -> float:
        return sum(self.converged) / len(self.converged)

    @property
    def mean_iter(self):
        """Mean iteration count, or ``None`` (NC) unless every seed converged."""
        if not all(self.converged):
            return None
        return float(np.mean(self.iterations))

    @property
    def mean_wall_s(self) -> float:
        return float(np.mean(self.wall_s))

    @property
    def residual_max(self) -> float:
        return max(self.residuals)

    def fields(self) -> list[str]:
        c = self.cell
        mean = self.mean_iter
        return [
            c.model,
            str(c.N),
            format_number(c.h),
            c.solver,
            str(len(c.seeds)),
            "" if mean is None else format_number(mean),
            format_number(self.converged_frac),
            format_number(self.mean_wall_s),
            format_number(self.residual_max),
        ]


def format_number(x: float) -> str:
    """Scientific notation with 10 significant digits."""
    return f"{x:.9e}"


def run_cell(cell: BenchCell) -> BenchRow:
    L = make_operator(cell.model, cell.N, cell.lam)
    cfg = SolverConfig(
        h=cell.h, tol=cell.tol, max_iter=cell.max_iter, newton_variant=cell.newton_variant
    )
    row = BenchRow(cell)
    for seed in cell.seeds:
        Y = initial_value(cell.model, cell.N, seed)
        t0 = time.perf_counter()
        _, report = solve(Y, L, cfg, cell.solver)
        row.wall_s.append(time.perf_counter() - t0)
        row.iterations.append(report.iterations)
        row.converged.append(report.converged)
        res = report.residual_norm
        row.residuals.append(res if math.isfinite(res) else math.inf)
    return row


def make_cells(model, h, solvers, max_n=None, n_values=None, seeds=None, **kw):
    """Cells for every ``(N, solver)`` pair, in output order."""
    if n_values is None:
        n_values = [n for n in N_LADDER if max_n is None or n <= max_n]
    if seeds is not None:
        kw["seeds"] = tuple(seeds)
    return [
        BenchCell(model, N, h, s, **kw) for N in sorted(n_values) for s in sorted(solvers)
    ]


def run_bench(cells, jobs: int = 1) -> list[BenchRow]:
    """Run cells (in parallel processes when ``jobs > 1``); rows come back sorted."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    return sorted(rows, key=lambda r: (r.cell.N, r.cell.solver))


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER.split(","))
        for r in rows:
            w.writerow(r.fields())
