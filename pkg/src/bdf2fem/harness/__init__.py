"""Convergence studies, stability sweeps, output writers and the CLI."""

from .output import CSV_HEADER, dump_rows, format_float, read_rows, write_rows
from .studies import (
    ConvergenceRow,
    ExperimentConfig,
    KernelReport,
    bounded_after_plateau,
    convergence_study,
    kernel_diagnostics,
    observed_order,
    plateau_onset,
    stability_sweep,
)

__all__ = [
    "CSV_HEADER",
    "ConvergenceRow",
    "ExperimentConfig",
    "KernelReport",
    "bounded_after_plateau",
    "convergence_study",
    "dump_rows",
    "format_float",
    "kernel_diagnostics",
    "observed_order",
    "plateau_onset",
    "read_rows",
    "stability_sweep",
    "write_rows",
]
