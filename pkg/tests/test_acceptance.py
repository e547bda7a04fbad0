"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest (lines are repeated in the terminal summary) or directly with
``python tests/test_acceptance.py``.  Tolerances, seeds and windows are fixed
here and never tuned per run.
"""
import time
from functools import lru_cache

import numpy as np
import pytest

from isocubic.algebra import BlockShape, frobenius_norm, random_normalized
from isocubic.bench import make_cells, run_bench
from isocubic.cli import main as cli_main
from isocubic.integrator import IntegratorConfig, conjugacy_check, run
from isocubic.models import initial_value, make_operator
from isocubic.operators import QuantizedLaplacian, operator_norm
from isocubic.oracle import assemble_operator_matrix, oracle_solve
from isocubic.riccati import random_admissible, solve_su2_branches
from isocubic.solvers import SolverConfig, jacobian_apply, newton_correction, residual, solve

RESULTS = {}
SOLVER_NAMES = ("explicit", "linear", "newton")

# reference Euler iteration means at h = 0.5, N = 3, 5, ..., 129
EULER_N = (3, 5, 9, 17, 33, 65, 129)
EULER_REFERENCE = {
    "explicit": (12, 9.5, 9.9, 11, 7.3, 7.8, 6.2),
    "linear": (11, 8.9, 8.3, 8.7, 6.5, 6.8, 5.6),
    "newton": (6.9, 5.5, 5.8, 6.1, 4.4, 4.8, 3.9),
}
EULER_WINDOW = 0.6


def _record(number, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f}s < {limit}s]"
    RESULTS[number] = line
    print(line)
    return ok


def _bench(model, h, n_values):
    cells = make_cells(model, h, SOLVER_NAMES, n_values=n_values)
    return {(r.cell.N, r.cell.solver): r for r in run_bench(cells)}


@lru_cache(maxsize=None)
def _timed_bench(model, h, n_values):
    t0 = time.perf_counter()
    rows = _bench(model, h, n_values)
    return rows, time.perf_counter() - t0


def check_1():
    t0 = time.perf_counter()
    plans = {
        "euler": [(3, 5, 9)[i % 3] for i in range(50)],
        "alfven": [(3, 5)[i % 2] for i in range(50)],
        "chain": [3 + i % 18 for i in range(50)],
    }
    worst, compared = 0.0, 0
    for model, sizes in plans.items():
        for seed, N in enumerate(sizes):
            L = make_operator(model, N)
            Y = initial_value(model, N, seed)
            Xo = oracle_solve(Y, L, 0.3)
            for name in SOLVER_NAMES:
                X, rep = solve(Y, L, SolverConfig(h=0.3), name)
                if rep.converged:
                    worst = max(worst, frobenius_norm(X - Xo))
                    compared += 1
    return _record(1, worst <= 1e-8 and compared > 0,
                   f"solvers vs oracle: max diff {worst:.2e} <= 1e-8 over {compared} solves",
                   time.perf_counter() - t0, 60)


def check_2():
    rows, elapsed = _timed_bench("euler", 0.5, EULER_N)
    bad_window, bad_order = [], []
    for i, N in enumerate(EULER_N):
        means = {}
        for name in SOLVER_NAMES:
            m = rows[(N, name)].mean_iter
            means[name] = np.inf if m is None else m
            ref = EULER_REFERENCE[name][i]
            if not abs(means[name] - ref) <= EULER_WINDOW * ref:
                bad_window.append(f"{name}@{N}={means[name]:.1f}")
        if not means["newton"] <= means["linear"] <= means["explicit"]:
            bad_order.append(
                f"N={N} ({means['newton']:.1f}, {means['linear']:.1f}, {means['explicit']:.1f})"
            )
    detail = (
        f"Euler windows +-60%: {'ok' if not bad_window else 'out ' + ', '.join(bad_window)}; "
        f"ordering N<=L<=E: {'ok' if not bad_order else 'violated ' + '; '.join(bad_order)}"
    )
    return _record(2, not bad_window and not bad_order, detail, elapsed, 120)


def check_3():
    rows, elapsed = _timed_bench("alfven", 0.5, (3, 5, 9, 17, 33, 65))
    fracs = min(r.converged_frac for r in rows.values())
    means = [r.mean_iter for r in rows.values()]
    worst = max(np.inf if m is None else m for m in means)
    return _record(3, fracs == 1.0 and worst <= 15,
                   f"Alfven: min converged_frac {fracs:.2f}, max mean iterations {worst:.1f} <= 15",
                   elapsed, 120)


def check_4():
    rows5, t5 = _timed_bench("chain", 0.5, (3, 5, 9, 17, 33, 65, 129))
    rows1, t1 = _timed_bench("chain", 0.1, (3, 5, 9, 17, 33, 65, 129, 257, 513, 1025))
    problems = []
    for (N, name), r in sorted(rows5.items()):
        if name == "linear":
            m = r.mean_iter
            if r.converged_frac < 1 or not 20 <= m <= 40:
                problems.append(f"h=0.5 linear@{N} frac={r.converged_frac:.1f} mean={m}")
        elif N >= 9 and r.converged_frac > 0:
            problems.append(f"h=0.5 {name}@{N} frac={r.converged_frac:.1f}")
    for (N, name), r in sorted(rows1.items()):
        m = r.mean_iter
        if r.converged_frac < 1 or m > 16:
            problems.append(f"h=0.1 {name}@{N} frac={r.converged_frac:.1f} mean={m}")
    detail = "spin-chain dichotomy: " + ("ok" if not problems else "; ".join(problems))
    return _record(4, not problems, detail, t5 + t1, 180)


def check_5():
    t0 = time.perf_counter()
    failures, worst_growth = 0, -np.inf
    for model in ("euler", "alfven", "chain"):
        for N in (3, 5, 9, 17, 33):
            L = make_operator(model, N)
            op = operator_norm(L)
            for seed in range(100):
                Y = initial_value(model, N, seed)
                h = 0.9 / (3 * op * frobenius_norm(Y))
                X, rep = solve(Y, L, SolverConfig(h=h), "explicit")
                if not rep.converged:
                    failures += 1
                elif model != "chain":
                    worst_growth = max(worst_growth, frobenius_norm(X) - frobenius_norm(Y))
    ok = failures == 0 and worst_growth <= 1e-10
    return _record(5, ok,
                   f"small-h regime: {failures} explicit failures of 1500, "
                   f"max ||X||-||Y|| = {worst_growth:.2e} <= 1e-10",
                   time.perf_counter() - t0, 60)


def check_6():
    t0 = time.perf_counter()
    worst = 0.0
    for N in range(3, 33):
        ev = np.linalg.eigvalsh(assemble_operator_matrix(QuantizedLaplacian(N)))
        ls = np.arange(1, N)
        expected = np.sort(np.repeat(-ls * (ls + 1.0), 2 * ls + 1))
        worst = max(worst, np.abs(ev - expected).max())
    return _record(6, worst <= 1e-9, f"Laplacian spectrum N=3..32: max error {worst:.2e} <= 1e-9",
                   time.perf_counter() - t0, 120)


def check_7():
    t0 = time.perf_counter()
    drifts = {}
    for model, N in (("euler", 9), ("chain", 20)):
        diag = run(initial_value(model, N, 42), make_operator(model, N),
                   IntegratorConfig(h=0.1, n_steps=100))
        drifts[model] = max(diag.spectral_drift)
    worst = max(drifts.values())
    return _record(7, worst <= 1e-8,
                   f"isospectrality: euler {drifts['euler']:.2e}, chain {drifts['chain']:.2e} <= 1e-8",
                   time.perf_counter() - t0, 30)


def check_8():
    t0 = time.perf_counter()
    diag = run(initial_value("euler", 9, 42), make_operator("euler", 9),
               IntegratorConfig(h=0.1, n_steps=1000))
    H = np.asarray(diag.hamiltonian)
    rel = (H - H[0]) / abs(H[0])
    n = np.arange(len(rel))
    slope = np.polyfit(n, rel, 1)[0]
    noise = np.diff(rel).std()
    ok = np.abs(rel).max() <= 1e-4 and abs(slope) < noise
    return _record(8, ok,
                   f"energy: max rel drift {np.abs(rel).max():.2e} <= 1e-4, "
                   f"|slope| {abs(slope):.2e}/step < step noise {noise:.2e}",
                   time.perf_counter() - t0, 60)


def check_9():
    t0 = time.perf_counter()
    shape = BlockShape.uniform(4)
    L = make_operator("euler", 4)
    worst, h, eps = 0.0, 0.4, 1e-5
    for seed in range(20):
        X = random_normalized(shape, 3 * seed)
        Z = random_normalized(shape, 3 * seed + 1)
        Y = random_normalized(shape, 3 * seed + 2)
        fd = (residual(X + eps * Z, Y, L, h) - residual(X - eps * Z, Y, L, h)) / (2 * eps)
        exact = jacobian_apply(X, Z, L, h)
        worst = max(worst, frobenius_norm(fd - exact) / frobenius_norm(exact))
    X, R = random_normalized(shape, 100), random_normalized(shape, 101)
    defects = []
    for hh in (0.1, 0.05, 0.025, 0.0125):
        C = newton_correction(X, R, L, hh, "V4")
        defects.append(frobenius_norm(jacobian_apply(X, C, L, hh) - R))
    ratios = np.array(defects[:-1]) / np.array(defects[1:])
    ok = worst <= 1e-8 and np.all((ratios >= 6) & (ratios <= 10))
    return _record(9, ok,
                   f"Jacobian FD rel err {worst:.2e} <= 1e-8; "
                   f"V4 defect ratios {np.round(ratios, 2).tolist()} in [6, 10]",
                   time.perf_counter() - t0, 10)


def check_10():
    t0 = time.perf_counter()
    worst, indistinct = 0.0, 0
    for seed in range(100):
        h = 0.1 + 0.8 * (seed % 10) / 10
        x, y = random_admissible(seed, h)
        br = solve_su2_branches(x, y, h)
        worst = max(worst, br.plus.residual, br.minus.residual)
        indistinct += not br.distinct
    x = np.array([0.4, -0.3, 1.1])
    z = np.array([0.7, 0.5, 0.9])
    diffs = []
    for hh in 0.2 / 2 ** np.arange(5):
        br = solve_su2_branches(x, x + hh * hh * z, hh)
        diffs.append(np.linalg.norm(br.plus.p_perp - br.minus.p_perp))
    orders = np.log2(np.array(diffs[:-1]) / np.array(diffs[1:]))
    ok = worst <= 1e-12 and indistinct == 0 and orders.min() >= 1.8
    return _record(10, ok,
                   f"Riccati: max residual {worst:.2e} <= 1e-12, {indistinct} coincident, "
                   f"p_perp order {orders.min():.2f} >= 1.8",
                   time.perf_counter() - t0, 5)


def check_11():
    t0 = time.perf_counter()
    cases = [("euler", 5, 0.3), ("alfven", 5, 0.3), ("chain", 5, 0.1), ("chain", 12, 0.3)]
    worst = 0.0
    for i in range(20):
        model, N, h = cases[i % len(cases)]
        Y = initial_value(model, N, i)
        worst = max(worst, conjugacy_check(Y, make_operator(model, N),
                                           IntegratorConfig(h=h, n_steps=1)))
    return _record(11, worst <= 1e-9, f"conjugacy defect {worst:.2e} <= 1e-9 on 20 instances",
                   time.perf_counter() - t0, 10)


def check_12(tmpdir):
    t0 = time.perf_counter()
    paths = [f"{tmpdir}/run{i}.csv" for i in range(2)]
    args = ["bench", "--model", "euler", "--h", "0.5", "--max-n", "17"]
    for p in paths:
        cli_main(args + ["--out", p])

    def strip(path):
        with open(path) as fh:
            rows = [line.rstrip("\n").split(",") for line in fh]
        return [r[:7] + r[8:] for r in rows]

    a, b = (strip(p) for p in paths)
    return _record(12, a == b and len(a) == 13,
                   f"bench CSVs identical modulo wall time ({len(a) - 1} rows)",
                   time.perf_counter() - t0, 60)


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number):
    assert globals()[f"check_{number}"](), RESULTS[number]


def test_criterion_12(tmp_path):
    assert check_12(tmp_path), RESULTS[12]


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        for k in range(1, 12):
            globals()[f"check_{k}"]()
        check_12(d)
    print()
    print("\n".join(RESULTS[k] for k in sorted(RESULTS)))
