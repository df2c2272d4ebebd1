"""Nonuniform time partitions of [0, T] and their step-ratio diagnostics.

Arrays are stored 0-based: ``tau[k-1]`` is the k-th step and ``ratios[k-1]``
is the ratio of step k to step k-1.  The first ratio has no predecessor and
is stored as 0; no formula ever reads it.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import rmax

__all__ = [
    "GridMode",
    "GridPolicy",
    "GridReport",
    "TimeGrid",
    "uniform_grid",
    "random_grid",
    "grid_from_steps",
    "validate",
    "write_grid_csv",
    "read_grid_csv",
]


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Levels ``0 = t_0 < ... < t_N = T`` with steps and adjacent ratios."""

    final_time: float
    levels: np.ndarray
    steps: np.ndarray
    ratios: np.ndarray

    @property
    def N(self) -> int:
        return len(self.steps)

    @property
    def max_step(self) -> float:
        return float(self.steps.max())

    @property
    def max_ratio(self) -> float:
        """Largest ratio ``tau_k / tau_{k-1}`` for k >= 2 (0 for one step)."""
        if self.N < 2:
            return 0.0
        return float(self.ratios[1:].max())

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return (
            self.final_time == other.final_time
            and np.array_equal(self.steps, other.steps)
            and np.array_equal(self.levels, other.levels)
        )


def grid_from_steps(steps) -> TimeGrid:
    """Build a grid from explicit positive step sizes."""
    tau = np.asarray(steps, dtype=float).copy()
    if tau.ndim != 1 or tau.size == 0:
        raise ValueError("steps must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(tau)) or np.any(tau <= 0):
        raise ValueError("all steps must be finite and positive")
    levels = np.concatenate(([0.0], np.cumsum(tau)))
    ratios = np.zeros_like(tau)
    ratios[1:] = tau[1:] / tau[:-1]
    for a in (tau, levels, ratios):
        a.setflags(write=False)
    return TimeGrid(float(levels[-1]), levels, tau, ratios)


def uniform_grid(T: float, N: int) -> TimeGrid:
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    steps = np.full(N, T / N)
    levels = np.arange(N + 1) * (T / N)
    levels[-1] = T
    ratios = np.ones(N)
    ratios[0] = 0.0
    for a in (steps, levels, ratios):
        a.setflags(write=False)
    return TimeGrid(float(T), levels, steps, ratios)


class GridMode(str, enum.Enum):
    UNIFORM = "uniform"
    CAPPED = "capped"
    UNCAPPED = "uncapped"


@dataclass(frozen=True)
class GridPolicy:
    """How to draw a time grid.

    ``ratio_cap`` is only consulted in ``CAPPED`` mode and must not exceed
    the critical ratio returned by :func:`bdf2fem.kernels.rmax`.
    """

    mode: GridMode = GridMode.CAPPED
    ratio_cap: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", GridMode(self.mode))
        if self.ratio_cap is None:
            object.__setattr__(self, "ratio_cap", rmax())
        if not self.ratio_cap > 0:
            raise ValueError("ratio_cap must be positive")
        if self.mode is GridMode.CAPPED and self.ratio_cap > rmax():
            raise ValueError(
                f"ratio_cap {self.ratio_cap} exceeds the critical ratio {rmax():.6f}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def rng(self) -> np.random.Generator:
        """PCG64 stream for this policy's seed."""
        return np.random.Generator(np.random.PCG64(int(self.seed)))


def _open_unit(rng: np.random.Generator) -> float:
    # Generator.random() samples [0, 1); drop the zero endpoint
    while True:
        x = rng.random()
        if x > 0.0:
            return x


def random_grid(T: float, N: int, policy: GridPolicy) -> TimeGrid:
    """Random grid with ``tau_k = T * lam_k / sum(lam)``, ``lam_k ~ U(0, 1)``.

    Under ``CAPPED`` each ``lam_k`` (k >= 2) is drawn from ``U(0, 1)``
    conditioned on ``lam_k / lam_{k-1} < ratio_cap``, i.e. the distribution
    of redrawing until the condition holds, sampled in one draw.  Normalisation does not change the
    ratios, so the cap carries over to the steps.  The draws come from
    numpy's PCG64 bit generator seeded with ``policy.seed``.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if policy.mode is GridMode.UNIFORM:
        return uniform_grid(T, N)

    rng = policy.rng()
    cap = float(policy.ratio_cap)
    lam = np.empty(N)
    lam[0] = _open_unit(rng)
    for k in range(1, N):
        x = _open_unit(rng)
        if policy.mode is GridMode.CAPPED:
            # U(0, 1) conditioned on x < cap * lam[k-1] is U(0, min(1, cap * lam[k-1]));
            # sampling it directly avoids unbounded redraws once lam drifts small
            x *= min(1.0, cap * lam[k - 1])
            if not x < cap * lam[k - 1]:
                x = np.nextafter(cap * lam[k - 1], 0.0)
        lam[k] = x
    return grid_from_steps(T * lam / lam.sum())


@dataclass(frozen=True)
class GridReport:
    max_ratio: float
    max_step: float
    tau_sqrtN: float
    a1_satisfied: bool


def validate(grid: TimeGrid, cap: float | None = None) -> GridReport:
    """Check the step-ratio condition and report the max-step quantity.

    ``tau * sqrt(N)`` is reported as a raw number; no threshold is applied.
    """
    cap = rmax() if cap is None else cap
    max_ratio = grid.max_ratio
    return GridReport(
        max_ratio=max_ratio,
        max_step=grid.max_step,
        tau_sqrtN=grid.max_step * math.sqrt(grid.N),
        a1_satisfied=bool(max_ratio < cap),
    )


def write_grid_csv(grid: TimeGrid, path) -> Path:
    """Write ``k, t_k, tau_k, r_k`` rows (k = 0 carries only ``t_0``)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t_k", "tau_k", "r_k"])
        w.writerow([0, repr(0.0), "", ""])
        for k in range(1, grid.N + 1):
            r = "" if k == 1 else repr(float(grid.ratios[k - 1]))
            w.writerow([k, repr(float(grid.levels[k])), repr(float(grid.steps[k - 1])), r])
    return path


def read_grid_csv(path) -> TimeGrid:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    steps = [float(row["tau_k"]) for row in rows if row["tau_k"] != ""]
    return grid_from_steps(steps)
