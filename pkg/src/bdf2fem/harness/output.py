"""CSV tables, gnuplot data files and kernel dumps."""

from __future__ import annotations

import csv
import math
from dataclasses import fields
from pathlib import Path

from .studies import ConvergenceRow

__all__ = [
    "CSV_HEADER",
    "format_float",
    "write_rows",
    "dump_rows",
    "read_rows",
    "write_curve_data",
    "write_gnuplot_script",
    "write_kernel_tables",
]

CSV_HEADER = ("study", "problem", "grid", "seed", "N", "M", "h", "tau_max",
              "r_max", "l2_error", "order", "status")
_FLOATS = {"h", "tau_max", "r_max", "l2_error", "order"}
_INTS = {"seed", "N", "M"}


def format_float(value: float | None) -> str:
    """Eight significant digits in scientific notation; blank for ``None``."""
    if value is None:
        return ""
    if math.isnan(value):
        return "nan"
    return f"{value:.7e}"


def _cell(row: ConvergenceRow, name: str) -> str:
    value = getattr(row, name)
    if name in _FLOATS:
        return format_float(value)
    return str(value)


def dump_rows(rows, fh) -> None:
    """Write the header and ``rows`` to an open text stream."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_cell(row, name) for name in CSV_HEADER])


def write_rows(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        dump_rows(rows, fh)
    return path


def _parse(name: str, text: str):
    if name in _INTS:
        return int(text)
    if name in _FLOATS:
        return None if text == "" else float(text)
    return text


def read_rows(path) -> list[ConvergenceRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
        names = [f.name for f in fields(ConvergenceRow)]
        return [ConvergenceRow(**{n: _parse(n, rec[n]) for n in names}) for rec in reader]


def write_curve_data(rows, stem) -> list[Path]:
    """One whitespace-separated ``M error`` file per ``N``; returns the paths."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    for n in sorted({r.N for r in rows}):
        path = stem.with_name(f"{stem.name}_N{n}.dat")
        with path.open("w") as fh:
            fh.write(f"# N = {n}\n# M l2_error status\n")
            for r in (r for r in rows if r.N == n):
                fh.write(f"{r.M} {format_float(r.l2_error)} {r.status}\n")
        paths.append(path)
    return paths


def write_gnuplot_script(data_files, path, image: str | None = None,
                         xlabel: str = "M", title: str = "") -> Path:
    path = Path(path)
    image = image or path.with_suffix(".svg").name
    lines = [
        "set terminal svg size 640,480",
        f"set output '{image}'",
        "set logscale xy",
        f"set xlabel '{xlabel}'",
        "set ylabel 'L2 error'",
        f"set title '{title}'" if title else "unset title",
        "set key top right",
    ]
    plots = []
    for f in data_files:
        f = Path(f)
        label = f.stem.rsplit("_", 1)[-1].replace("N", "N = ")
        plots.append(f"'{f.name}' using 1:2 with linespoints title '{label}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_kernel_tables(doc, dcc, path) -> Path:
    """Rows ``n, j, theta, p`` for 1 <= j <= n <= N (1-based levels)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "j", "theta", "p"])
        for n in range(1, doc.N + 1):
            for j in range(1, n + 1):
                w.writerow([n, j, repr(float(doc.theta[n - 1, j - 1])),
                            repr(float(dcc.p[n - 1, j - 1]))])
    return path
