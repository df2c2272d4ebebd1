"""Matplotlib renderings of study tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_convergence", "plot_stability"]


def _plottable(rows):
    # zero errors (e.g. the heat problem) cannot sit on a log axis
    return [r for r in rows if r.ok and r.l2_error > 0]


def _finish(fig, ax, path) -> Path:
    ax.set_xscale("log")
    if ax.lines:
        ax.set_yscale("log")
        ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_convergence(rows, path, refine: str = "N") -> Path:
    """Error against the refined parameter with a slope-2 guide."""
    ok = _plottable(rows)
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        x = np.array([getattr(r, refine) for r in ok], dtype=float)
        e = np.array([r.l2_error for r in ok])
        ax.plot(x, e, "o-", label=f"{ok[0].problem} ({ok[0].grid})")
        ax.plot(x, e[0] * (x[0] / x) ** 2, "k--", lw=0.8, label="slope 2")
    ax.set_xlabel(refine)
    ax.set_ylabel("$L^2$ error")
    return _finish(fig, ax, path)


def plot_stability(rows, path) -> Path:
    """One error-versus-M curve per N."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for n in sorted({r.N for r in rows}):
        curve = _plottable(r for r in rows if r.N == n)
        if curve:
            ax.plot([r.M for r in curve], [r.l2_error for r in curve], "o-", label=f"N = {n}")
    ax.set_xlabel("M")
    ax.set_ylabel("$L^2$ error")
    return _finish(fig, ax, path)
