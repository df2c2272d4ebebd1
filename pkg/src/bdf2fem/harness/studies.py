"""Convergence studies, stability sweeps and kernel diagnostics."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .. import kernels
from ..fem import SolverFailure
from ..mesh import mesh_size, unit_mesh
from ..problems import get_problem
from ..solver import BlowUpError, SolveOptions, run
from ..timegrid import GridMode, GridPolicy, TimeGrid, random_grid

__all__ = [
    "STUDY_KINDS",
    "ExperimentConfig",
    "ConvergenceRow",
    "convergence_study",
    "stability_sweep",
    "kernel_diagnostics",
    "observed_order",
    "plateau_onset",
    "bounded_after_plateau",
]

log = logging.getLogger(__name__)

STUDY_KINDS = ("temporal", "spatial", "stability", "kernels")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    ``temporal`` pairs ``M`` with ``N`` row by row (``M`` defaults to ``N``);
    ``spatial`` fixes a single ``N`` and refines ``M``; ``stability`` runs
    every ``(N, M)`` combination, one curve per ``N``.  Row ``i`` draws its
    grid with seed ``seed + i``.
    """

    problem: str = "example51"
    study: str = "temporal"
    M: tuple[int, ...] = ()
    N: tuple[int, ...] = ()
    grid: str = "capped"
    seed: int = 0
    cap: float | None = None
    T: float = 1.0
    out: str | None = None
    cg_tol: float = 1e-12
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "M", tuple(int(m) for m in self.M))
        object.__setattr__(self, "N", tuple(int(n) for n in self.N))
        if self.study not in STUDY_KINDS:
            raise ValueError(f"study must be one of {STUDY_KINDS}, got {self.study!r}")
        GridMode(self.grid)
        get_problem(self.problem)
        if not self.T > 0:
            raise ValueError("T must be positive")
        if any(n < 1 for n in self.N) or any(m < 1 for m in self.M):
            raise ValueError("N and M entries must be positive")
        if not self.N:
            raise ValueError("at least one N is required")
        if self.study == "temporal" and self.M and len(self.M) != len(self.N):
            raise ValueError("temporal studies pair M with N: lists must have equal length")
        if self.study == "spatial" and (len(self.N) != 1 or not self.M):
            raise ValueError("spatial studies need exactly one N and a nonempty M list")
        if self.study == "stability" and not self.M:
            raise ValueError("stability sweeps need a nonempty M list")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def policy(self, row: int) -> GridPolicy:
        return GridPolicy(GridMode(self.grid), self.cap, self.seed + row)

    def jobs(self) -> list[tuple[int, int]]:
        if self.study == "temporal":
            return list(zip(self.N, self.M or self.N))
        if self.study == "spatial":
            return [(self.N[0], m) for m in self.M]
        if self.study == "stability":
            return [(n, m) for n in self.N for m in self.M]
        raise ValueError("kernel studies have no solver rows")


@dataclass
class ConvergenceRow:
    study: str
    problem: str
    grid: str
    seed: int
    N: int
    M: int
    h: float
    tau_max: float
    r_max: float
    l2_error: float
    order: float | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def observed_order(e_prev: float, e_curr: float, factor: float) -> float:
    """``log(e_prev / e_curr) / log(factor)``."""
    return math.log(e_prev / e_curr) / math.log(factor)


def _run_row(args) -> ConvergenceRow:
    config, index, N, M = args
    problem = get_problem(config.problem)
    policy = config.policy(index)
    grid = random_grid(config.T, N, policy)
    mesh = unit_mesh(problem.dim, M)
    row = ConvergenceRow(
        study=config.study, problem=config.problem, grid=config.grid,
        seed=policy.seed, N=N, M=M, h=mesh_size(mesh), tau_max=grid.max_step,
        r_max=grid.max_ratio, l2_error=float("nan"),
    )
    try:
        result = run(problem, grid, mesh, SolveOptions(cg_tol=config.cg_tol))
    except SolverFailure as exc:
        log.warning("row %d (N=%d, M=%d) solver failure at step %s: %s",
                    index, N, M, exc.step, exc)
        row.status = "solver-failure"
        return row
    except BlowUpError as exc:
        log.warning("row %d (N=%d, M=%d) blew up at step %d", index, N, M, exc.step)
        row.status = "blowup"
        return row
    row.l2_error = result.final_l2_error
    log.info("row %d: N=%d M=%d error=%.4e (%.1fs)", index, N, M,
             row.l2_error, result.wall_time)
    return row


def _execute(config: ExperimentConfig) -> list[ConvergenceRow]:
    jobs = [(config, i, N, M) for i, (N, M) in enumerate(config.jobs())]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_row, jobs))
    return [_run_row(job) for job in jobs]


def _fill_orders(rows: list[ConvergenceRow], refine: str) -> None:
    for prev, curr in zip(rows, rows[1:]):
        a, b = getattr(prev, refine), getattr(curr, refine)
        if prev.ok and curr.ok and b != a and prev.l2_error > 0 and curr.l2_error > 0:
            curr.order = observed_order(prev.l2_error, curr.l2_error, b / a)


def convergence_study(config: ExperimentConfig) -> list[ConvergenceRow]:
    """Run a temporal (``M`` paired with ``N``) or spatial (fixed ``N``) study."""
    if config.study not in ("temporal", "spatial"):
        raise ValueError("convergence_study handles temporal and spatial studies")
    rows = _execute(config)
    _fill_orders(rows, "N" if config.study == "temporal" else "M")
    return rows


def stability_sweep(config: ExperimentConfig) -> list[ConvergenceRow]:
    """Errors for every ``(N, M)``; orders are taken along each fixed-``N`` curve."""
    if config.study != "stability":
        config = replace(config, study="stability")
    rows = _execute(config)
    for n in config.N:
        _fill_orders([r for r in rows if r.N == n], "M")
    return rows


def plateau_onset(errors) -> int:
    """Index where refinement stops halving the error.

    The first ``i`` with ``errors[i+1] > errors[i] / 2``; the last index if
    the sequence keeps halving.
    """
    e = list(errors)
    for i in range(len(e) - 1):
        if e[i + 1] > e[i] / 2.0:
            return i
    return len(e) - 1


def bounded_after_plateau(errors, factor: float = 2.0) -> bool:
    """True if every error from the plateau onset on stays within ``factor`` of it."""
    e = np.asarray(errors, dtype=float)
    if not np.all(np.isfinite(e)):
        return False
    i = plateau_onset(e)
    return bool(np.all(e[i:] <= factor * e[i]))


@dataclass
class KernelReport:
    N: int
    max_ratio: float
    a1_satisfied: bool
    orthogonality: float
    complementary: float
    doc_telescoping: float
    dcc_telescoping: float
    relation: float
    min_theta: float
    max_p: float
    two_tau: float
    theta_rowsum: float
    p_rowsum: float
    min_quadratic_b_margin: float
    min_quadratic_theta: float
    samples: int = field(default=0)

    def as_dict(self) -> dict:
        return asdict(self)


def kernel_diagnostics(grid: TimeGrid, samples: int = 20, seed: int = 0,
                       cap: float | None = None) -> KernelReport:
    """Residuals of every kernel identity on ``grid``.

    Telescoping residuals use random level sequences and are relative to
    the largest sample magnitude.  The quadratic-form entries are minima
    over ``samples`` random vectors: ``min_quadratic_b_margin`` is the
    smallest value of ``2 w.Bw - (delta/20) sum w_k^2/tau_k`` with
    ``delta = rmax - max_ratio`` (meaningful only when the grid satisfies
    the ratio cap).
    """
    cap = kernels.rmax() if cap is None else cap
    coeffs = kernels.bdf2_coefficients(grid)
    doc = kernels.doc_kernels(coeffs)
    dcc = kernels.dcc_kernels(doc)
    tau = np.asarray(grid.steps)
    t = np.asarray(grid.levels)
    rng = np.random.Generator(np.random.PCG64(seed))

    doc_tel = dcc_tel = 0.0
    qb = qt = math.inf
    delta = kernels.rmax() - grid.max_ratio
    for _ in range(max(samples, 1)):
        u = rng.standard_normal(grid.N + 1)
        d = kernels.apply_d2(coeffs, u)
        scale = max(1.0, float(np.abs(u).max()))
        doc_tel = max(doc_tel, float(np.abs(doc.theta @ d - np.diff(u)).max()) / scale)
        dcc_tel = max(dcc_tel, float(np.abs(dcc.p @ d - (u[1:] - u[0])).max()) / scale)
        w = rng.standard_normal(grid.N)
        bound = delta / 20.0 * float(np.sum(w * w / tau))
        qb = min(qb, kernels.quadratic_form_b(coeffs, w) - bound)
        qt = min(qt, kernels.quadratic_form_theta(doc, w))

    lower = np.tril_indices(grid.N)
    return KernelReport(
        N=grid.N,
        max_ratio=grid.max_ratio,
        a1_satisfied=bool(grid.max_ratio < cap),
        orthogonality=kernels.orthogonality_residual(coeffs, doc),
        complementary=kernels.complementary_residual(coeffs, dcc),
        doc_telescoping=doc_tel,
        dcc_telescoping=dcc_tel,
        relation=kernels.relation_residual(doc, dcc),
        min_theta=float(doc.theta[lower].min()),
        max_p=float(dcc.p[lower].max()),
        two_tau=2.0 * grid.max_step,
        theta_rowsum=float(np.abs(doc.theta.sum(axis=1) - tau).max()),
        p_rowsum=float(np.abs(dcc.p.sum(axis=1) - t[1:]).max()),
        min_quadratic_b_margin=qb,
        min_quadratic_theta=qt,
        samples=max(samples, 1),
    )
