"""Command-line interface: ``solve``, ``bench``, ``evolve`` and ``demo-riccati``.

Exit codes: 0 ok, 1 usage error, 2 non-convergence or no real solution,
3 trajectory aborted.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .algebra import SingularBlockError
from .bench import DEFAULT_BASE_SEED, DEFAULT_N_SEEDS, format_number, make_cells
from .bench import run_bench, write_csv
from .integrator import IntegratorConfig, StepFailure, run
from .models import DEFAULT_LAMBDA, MODELS, initial_value, make_operator
from .riccati import NoRealSolutionError, random_admissible, solve_su2_branches
from .solvers import SOLVERS, NewtonVariant, SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_NC, EXIT_ABORT = 0, 1, 2, 3

EVOLVE_HEADER = "step,time,hamiltonian,spectral_drift,solver_iters"
SOLVE_HEADER = "model,N,h,solver,seed,converged,iterations,final_step_norm,residual_norm"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _solver_list(text: str) -> list[str]:
    if text == "all":
        return sorted(SOLVERS)
    names = [s for s in text.replace(",", " ").split() if s]
    bad = [s for s in names if s not in SOLVERS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown solver(s) {bad}; choose from {sorted(SOLVERS)}")
    return sorted(set(names))


def _vector3(text: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a vector: {text!r}")
    if v.shape != (3,):
        raise argparse.ArgumentTypeError("expected 3 components")
    return v


def _add_model_args(p, with_n=True):
    p.add_argument("--model", choices=MODELS, required=True)
    if with_n:
        p.add_argument("--n", type=int, required=True, help="matrix size or particle count")
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isocubic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one cubic equation")
    _add_model_args(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="linear")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--newton-variant", choices=[v.value for v in NewtonVariant], default="V2")
    p.add_argument("--out")

    p = sub.add_parser("bench", help="iteration-count sweep over the N ladder")
    _add_model_args(p, with_n=False)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--solvers", type=_solver_list, default=sorted(SOLVERS))
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("--seeds", type=int, default=DEFAULT_N_SEEDS, help="number of seeds")
    p.add_argument("--base-seed", type=int, default=DEFAULT_BASE_SEED)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evolve", help="integrate a trajectory")
    _add_model_args(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="linear")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("demo-riccati", help="show the two branches of the su(2) Riccati equation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x", type=_vector3)
    p.add_argument("--y", type=_vector3)
    p.add_argument("--h", type=float, default=0.5)
    return parser


def cmd_solve(args) -> int:
    if args.n < (3 if args.model == "chain" else 2):
        raise UsageError(f"--n {args.n} is too small for model {args.model}")
    cfg = SolverConfig(
        h=args.h, tol=args.tol, max_iter=args.max_iter, newton_variant=args.newton_variant
    )
    L = make_operator(args.model, args.n, args.lam)
    Y = initial_value(args.model, args.n, args.seed)
    _, report = solve(Y, L, cfg, args.solver)
    print(f"model={args.model} N={args.n} h={args.h:g} solver={args.solver} seed={args.seed}")
    print(f"converged: {report.converged}")
    print(f"iterations: {report.iterations}")
    print(f"final step norm: {report.final_step_norm:.3e}")
    print(f"residual ||X - F_h(X)||: {report.residual_norm:.3e}")
    if not report.converged:
        print(f"non-convergence: {report.reason}")
    if args.out:
        row = [
            args.model, str(args.n), format_number(args.h), args.solver, str(args.seed),
            str(int(report.converged)), str(report.iterations),
            format_number(report.final_step_norm), format_number(report.residual_norm),
        ]
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SOLVE_HEADER.split(","))
            w.writerow(row)
    return EXIT_OK if report.converged else EXIT_NC


def cmd_bench(args) -> int:
    if args.seeds < 1:
        raise UsageError("--seeds must be positive")
    seeds = range(args.base_seed, args.base_seed + args.seeds)
    cells = make_cells(
        args.model, args.h, args.solvers, max_n=args.max_n, seeds=seeds,
        lam=args.lam, tol=args.tol, max_iter=args.max_iter,
    )
    if not cells:
        raise UsageError("--max-n excludes every matrix size")
    open(args.out, "w").close()  # fail early on an unwritable path
    rows = run_bench(cells, jobs=args.jobs)
    write_csv(rows, args.out)
    for r in rows:
        mean = r.mean_iter
        shown = "NC" if mean is None else f"{mean:.1f}"
        print(f"N={r.cell.N:5d} {r.cell.solver:8s} iter={shown:>6s} converged={r.converged_frac:.2f}")
    return EXIT_OK


def _write_trajectory(diag, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVOLVE_HEADER.split(","))
        for row in zip(diag.steps, diag.times, diag.hamiltonian, diag.spectral_drift,
                       diag.solver_iterations):
            n, t, H, drift, iters = row
            w.writerow([n, format_number(t), format_number(H), format_number(drift), iters])


def cmd_evolve(args) -> int:
    if args.n < (3 if args.model == "chain" else 2):
        raise UsageError(f"--n {args.n} is too small for model {args.model}")
    cfg = IntegratorConfig(
        h=args.h, n_steps=args.steps, solver=args.solver, record_every=args.record_every
    )
    L = make_operator(args.model, args.n, args.lam)
    Y0 = initial_value(args.model, args.n, args.seed)
    open(args.out, "w").close()
    try:
        diag = run(Y0, L, cfg)
    except StepFailure as exc:
        if exc.diagnostics is not None:
            _write_trajectory(exc.diagnostics, args.out)
        print(f"trajectory aborted at step {exc.step_index}: {exc.report.summary()}",
              file=sys.stderr)
        return EXIT_ABORT
    _write_trajectory(diag, args.out)
    drift = np.asarray(diag.relative_energy_drift())
    print(f"steps: {args.steps}  recorded: {len(diag.steps)}")
    print(f"max spectral drift: {max(diag.spectral_drift):.3e}")
    print(f"max relative energy drift: {drift.max():.3e}")
    return EXIT_OK


def _fmt_vec(v):
    return "(" + ", ".join(f"{c: .12g}" for c in v) + ")"


def cmd_demo_riccati(args) -> int:
    if (args.x is None) != (args.y is None):
        raise UsageError("--x and --y must be given together")
    if args.h <= 0:
        raise UsageError("--h must be positive")
    if args.x is None:
        x, y = random_admissible(args.seed, args.h)
    else:
        x, y = args.x, args.y
    print(f"x = {_fmt_vec(x)}")
    print(f"y = {_fmt_vec(y)}")
    print(f"h = {args.h:g}")
    try:
        branches = solve_su2_branches(x, y, args.h)
    except NoRealSolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NC
    except np.linalg.LinAlgError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NC
    for name, b in (("+", branches.plus), ("-", branches.minus)):
        print(f"branch {name}: p_parallel = {_fmt_vec(b.p_parallel)}")
        print(f"          p_perp     = {_fmt_vec(b.p_perp)}")
        print(f"          residual   = {b.residual:.3e}")
    print("verdict: NON-UNIQUE" if branches.distinct else "verdict: UNIQUE")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "evolve": cmd_evolve,
    "demo-riccati": cmd_demo_riccati,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        if isinstance(exc, SingularBlockError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NC
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
