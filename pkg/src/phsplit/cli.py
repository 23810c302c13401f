"""Batch command line interface.

``phsplit run <config>`` executes the full (lambda, omega) sweep described
by a TOML config and writes, per cell, the per-iteration report CSV plus a
convergence figure, and once per run the reference/final-iterate trajectory
CSVs, an overview figure, and ``summary.txt``.  ``phsplit check <config>``
assembles the problem and evaluates the structural certificates only.

Exit status is nonzero iff a mandatory check fails: certificate failure at
assembly, a solver error in some cell, or any theorem flag false in any
report.  Hitting max_iter without meeting the update tolerance is reported
in the summary but is not by itself a failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .config import ExperimentConfig, build_problem, dump_config, parse_config
from .errors import (
    CouplingNotMonotone,
    NotDissipative,
    ParseError,
    ValidationError,
    WeightNotSPD,
)
from .iteration import run
from .monolithic import solve_monolithic
from .node import check_coupling_monotone, check_dissipativity, estimate_psop_epsilon
from .operators import (
    apply_I_plus_lambda_M,
    check_discrete_monotonicity,
    pair_diff,
    pair_norm,
    resolve_M,
)
from .report import CellResult, cell_tag, emit_summary, render_cell_figure, render_overview
from .trajectory import MIDPOINT, NODE, GridTrajectory, TrajPair, write_csv

_ASSEMBLY_ERRORS = (
    NotDissipative,
    CouplingNotMonotone,
    WeightNotSPD,
    ValidationError,
    FileNotFoundError,
)


def _load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _random_pair(problem, rng) -> TrajPair:
    g = problem.grid
    xv = rng.standard_normal((g.N_t + 1, problem.node.n))
    xv[0] = problem.x0  # row 0 is pinned by the operator's domain convention
    x = GridTrajectory(g, NODE, xv)
    u = GridTrajectory(g, MIDPOINT, rng.standard_normal((g.N_t, problem.node.m_int)))
    return TrajPair(x, u)


def check_experiment(config: ExperimentConfig, out=None) -> int:
    """Certificate-only pass: assembly, passivity, monotonicity, round-trip."""
    out = out if out is not None else sys.stdout  # late binding for redirection
    try:
        problem = build_problem(config)
    except _ASSEMBLY_ERRORS as exc:
        print(f"assembly: FAIL ({type(exc).__name__}: {exc})", file=out)
        return 1
    node = problem.node
    print(
        f"assembly: ok (n={node.n}, m_ext={node.m_ext}, m_int={node.m_int}, "
        f"N_t={config.N_t})",
        file=out,
    )
    failed = False

    diss = check_dissipativity(node)
    print(
        f"dissipativity: max_sym_eig={diss.max_sym_eig:.3e} "
        f"-> {'ok' if diss.is_dissipative else 'FAIL'}",
        file=out,
    )
    failed |= not diss.is_dissipative

    coup = check_coupling_monotone(problem.coupling.N_c)
    print(f"coupling monotone: {'ok' if coup else 'FAIL'}", file=out)
    failed |= not coup

    mono = check_discrete_monotonicity(problem, n_samples=100, seed=config.seed)
    print(
        f"discrete monotonicity (100 samples): min slack {mono.min_slack:.3e} "
        f"-> {'ok' if mono.passed else 'FAIL'}",
        file=out,
    )
    failed |= not mono.passed

    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for lam in config.lambdas:
        pair = _random_pair(problem, rng)
        image = apply_I_plus_lambda_M(problem, lam, pair)
        back = resolve_M(problem, lam, image)
        rel = pair_norm(problem, pair_diff(back, pair)) / (1.0 + pair_norm(problem, pair))
        worst = max(worst, rel)
    ok = worst <= 1e-10
    print(f"resolvent round-trip: worst relative residual {worst:.3e} -> "
          f"{'ok' if ok else 'FAIL'}", file=out)
    failed |= not ok

    psop = estimate_psop_epsilon(node)
    if psop.vacuous:
        print("psop epsilon: vacuous (no external output)", file=out)
    else:
        print(f"psop epsilon: {psop.epsilon:.6e}", file=out)

    print("check: " + ("FAIL" if failed else "ok"), file=out)
    return 1 if failed else 0


def run_experiment(config: ExperimentConfig, out=None) -> int:
    """Execute the sweep, write all artifacts, and return the exit status."""
    out = out if out is not None else sys.stdout  # late binding for redirection
    try:
        problem = build_problem(config)
        reference = solve_monolithic(problem)
    except _ASSEMBLY_ERRORS as exc:
        print(f"assembly: FAIL ({type(exc).__name__}: {exc})", file=out)
        return 1

    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "config.toml"), "w", encoding="utf-8") as fh:
        fh.write(dump_config(config))
    write_csv(reference.x, os.path.join(config.out_dir, "reference_x.csv"))
    write_csv(reference.u, os.path.join(config.out_dir, "reference_u.csv"))

    cells: list[CellResult] = []
    for lam in config.lambdas:
        for omega in config.omegas:
            tag = cell_tag(lam, omega)
            try:
                rep = run(
                    problem,
                    lam=lam,
                    omega=omega,
                    tol_update=config.tol_update,
                    max_iter=config.max_iter,
                    reference=reference,
                )
            except Exception as exc:  # keep remaining cells running
                cells.append(
                    CellResult(lam, omega, error=f"{type(exc).__name__}: {exc}")
                )
                continue
            rep.to_csv(os.path.join(config.out_dir, f"report_{tag}.csv"))
            write_csv(rep.final_pair.x, os.path.join(config.out_dir, f"final_x_{tag}.csv"))
            write_csv(rep.final_pair.u, os.path.join(config.out_dir, f"final_u_{tag}.csv"))
            render_cell_figure(rep, os.path.join(config.out_dir, f"fig_{tag}.png"))
            cells.append(CellResult(lam, omega, report=rep))

    render_overview(cells, os.path.join(config.out_dir, "overview.png"))
    summary = emit_summary(cells)
    with open(os.path.join(config.out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary)
    print(summary, end="", file=out)

    failed = any(c.error is not None for c in cells) or any(
        not c.report.all_checks_ok() for c in cells if c.report is not None
    )
    print(f"run: {'FAIL' if failed else 'ok'} "
          f"({len(cells)} cells, results in {config.out_dir})", file=out)
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phsplit",
        description="Splitting solver for coupled passive systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured sweep and write reports")
    p_run.add_argument("config", help="path to a TOML experiment config")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, help="seed override")

    p_check = sub.add_parser("check", help="evaluate certificates only")
    p_check.add_argument("config", help="path to a TOML experiment config")
    p_check.add_argument("--seed", type=int, help="seed override")

    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
    except FileNotFoundError:
        print(f"config not found: {args.config}", file=sys.stderr)
        return 1
    except (ParseError, ValidationError) as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return 1

    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.command == "run" and args.out is not None:
        config = dataclasses.replace(config, out_dir=args.out)

    if args.command == "run":
        return run_experiment(config)
    return check_experiment(config)


if __name__ == "__main__":
    sys.exit(main())
