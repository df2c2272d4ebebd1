"""Command line entry point: ``bdf2fem {converge,stability,kernels,solve}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from scipy.io import mmwrite

from .. import kernels
from ..fem import assemble_mass, assemble_stiffness
from ..mesh import mesh_size, unit_mesh, write_mesh
from ..problems import PROBLEMS, get_problem
from ..solver import BlowUpError, SolveOptions, SolverFailure, run
from ..timegrid import GridPolicy, random_grid, validate, write_grid_csv
from .output import dump_rows, write_curve_data, write_gnuplot_script, write_kernel_tables, write_rows
from .plotting import plot_convergence, plot_stability
from .studies import (
    ConvergenceRow,
    ExperimentConfig,
    convergence_study,
    kernel_diagnostics,
    stability_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILED_ROWS = 3

log = logging.getLogger("bdf2fem")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _flatten(groups) -> tuple[int, ...]:
    return tuple(v for g in (groups or ()) for v in g)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="example51")
    p.add_argument("--grid", choices=["uniform", "capped", "uncapped"], default="capped")
    p.add_argument("--cap", type=float, default=None,
                   help="ratio cap for capped grids (default: the critical ratio 4.8645...)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=float, default=1.0, dest="T")
    p.add_argument("--N", type=_int_list, nargs="+", default=None, metavar="LIST")
    p.add_argument("--M", type=_int_list, nargs="+", default=None, metavar="LIST")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--cg-tol", type=float, default=1e-12)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdf2fem",
        description="Variable-step BDF2 / P1 FEM convergence and stability experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="temporal or spatial convergence table")
    _common(p)
    p.add_argument("--study", choices=["temporal", "spatial"], default="temporal")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("stability", help="error against M for fixed N values")
    _common(p)
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("kernels", help="DOC/DCC kernel identity diagnostics")
    _common(p)
    p.add_argument("--samples", type=int, default=20)

    p = sub.add_parser("solve", help="single run")
    _common(p)
    p.add_argument("--dump-mesh", type=Path, default=None, help="write the mesh as plain text")
    p.add_argument("--dump-matrices", type=Path, default=None,
                   help="directory for mass.mtx and stiffness.mtx (Matrix Market)")
    return parser


def _config(args, study: str) -> ExperimentConfig:
    return ExperimentConfig(
        problem=args.problem, study=study, M=_flatten(args.M), N=_flatten(args.N),
        grid=args.grid, seed=args.seed, cap=args.cap, T=args.T,
        out=str(args.out) if args.out else None, cg_tol=args.cg_tol, workers=args.workers,
    )


def _emit(rows, args) -> None:
    if args.out is None:
        dump_rows(rows, sys.stdout)
    else:
        write_rows(rows, args.out)
        log.info("wrote %s", args.out)


def _exit_code(rows) -> int:
    return EXIT_FAILED_ROWS if any(not r.ok for r in rows) else EXIT_OK


def cmd_converge(args) -> int:
    config = _config(args, args.study)
    rows = convergence_study(config)
    _emit(rows, args)
    if args.out is not None and not args.no_plot:
        plot_convergence(rows, args.out.with_suffix(".png"),
                         refine="N" if config.study == "temporal" else "M")
    return _exit_code(rows)


def cmd_stability(args) -> int:
    config = _config(args, "stability")
    rows = stability_sweep(config)
    _emit(rows, args)
    if args.out is not None:
        stem = args.out.with_suffix("")
        data = write_curve_data(rows, stem)
        write_gnuplot_script(data, stem.with_suffix(".gp"), title=f"{config.problem}")
        if not args.no_plot:
            plot_stability(rows, stem.with_suffix(".png"))
    return _exit_code(rows)


def _single(values, name: str) -> int:
    values = _flatten(values)
    if len(values) != 1:
        raise ValueError(f"{name} must be a single value for this command")
    return values[0]


def cmd_kernels(args) -> int:
    N = _single(args.N, "--N")
    grid = random_grid(args.T, N, GridPolicy(args.grid, args.cap, args.seed))
    report = kernel_diagnostics(grid, samples=args.samples, seed=args.seed, cap=args.cap)
    text = json.dumps(report.as_dict(), indent=2)
    print(text)
    if args.out is not None:
        coeffs = kernels.bdf2_coefficients(grid)
        doc = kernels.doc_kernels(coeffs)
        write_kernel_tables(doc, kernels.dcc_kernels(doc), args.out)
        args.out.with_suffix(".json").write_text(text + "\n")
        write_grid_csv(grid, args.out.with_name(args.out.stem + "_grid.csv"))
    return EXIT_OK


def cmd_solve(args) -> int:
    N = _single(args.N, "--N")
    M = _single(args.M, "--M")
    problem = get_problem(args.problem)
    grid = random_grid(args.T, N, GridPolicy(args.grid, args.cap, args.seed))
    mesh = unit_mesh(problem.dim, M)
    report = validate(grid, args.cap)
    if args.dump_mesh is not None:
        write_mesh(mesh, args.dump_mesh)
    if args.dump_matrices is not None:
        args.dump_matrices.mkdir(parents=True, exist_ok=True)
        mmwrite(str(args.dump_matrices / "mass.mtx"), assemble_mass(mesh))
        mmwrite(str(args.dump_matrices / "stiffness.mtx"), assemble_stiffness(mesh))
    row = ConvergenceRow("solve", args.problem, args.grid, args.seed, N, M,
                         mesh_size(mesh), report.max_step, report.max_ratio, float("nan"))
    try:
        result = run(problem, grid, mesh,
                     SolveOptions(cg_tol=args.cg_tol, record_per_step_errors=True))
        row.l2_error = result.final_l2_error
    except SolverFailure as exc:
        log.error("solver failure at step %s: %s", exc.step, exc)
        row.status = "solver-failure"
        result = None
    except BlowUpError as exc:
        log.error("%s", exc)
        row.status = "blowup"
        result = None
    _emit([row], args)
    if args.out is not None and result is not None:
        steps = args.out.with_name(args.out.stem + "_steps.csv")
        with steps.open("w") as fh:
            fh.write("n,t_n,l2_error\n")
            for n, e in enumerate(result.per_step_l2_error, start=1):
                fh.write(f"{n},{grid.levels[n]!r},{e:.7e}\n")
    return _exit_code([row])


COMMANDS = {
    "converge": cmd_converge,
    "stability": cmd_stability,
    "kernels": cmd_kernels,
    "solve": cmd_solve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"bdf2fem: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
