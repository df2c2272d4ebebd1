import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.io import mmread
from hypothesis import strategies as st

from bdf2fem.harness import (
    ConvergenceRow,
    ExperimentConfig,
    bounded_after_plateau,
    convergence_study,
    kernel_diagnostics,
    observed_order,
    plateau_onset,
    read_rows,
    stability_sweep,
    write_rows,
)
from bdf2fem.harness.cli import main
from bdf2fem.harness.output import CSV_HEADER, format_float, write_curve_data
from bdf2fem.timegrid import GridPolicy, random_grid, uniform_grid


def test_observed_order_hand_values():
    assert observed_order(4e-3, 1e-3, 2.0) == pytest.approx(2.0, abs=1e-12)
    assert observed_order(1.0, 1 / 27, 3.0) == pytest.approx(3.0, abs=1e-12)
    e1, e2 = 8.7912e-5, 2.1803e-5
    assert observed_order(e1, e2, 2) == pytest.approx(math.log(e1 / e2) / math.log(2), abs=1e-12)


def test_temporal_study_orders_and_seeds():
    cfg = ExperimentConfig(problem="example51", study="temporal", N=(4, 8), M=(4, 4), seed=10)
    rows = convergence_study(cfg)
    assert [r.seed for r in rows] == [10, 11]
    assert rows[0].order is None
    assert rows[1].order == pytest.approx(
        math.log(rows[0].l2_error / rows[1].l2_error) / math.log(2), abs=1e-12)
    assert all(r.ok and r.r_max < 4.8645 for r in rows)
    # the row grid is reproducible from its seed
    assert random_grid(1.0, 8, GridPolicy("capped", seed=11)).max_ratio == rows[1].r_max


def test_single_row_has_no_order():
    rows = convergence_study(ExperimentConfig(study="temporal", N=(3,)))
    assert len(rows) == 1 and rows[0].order is None and rows[0].M == 3


def test_spatial_study_orders_against_M():
    rows = convergence_study(ExperimentConfig(study="spatial", N=(20,), M=(4, 8), grid="uniform"))
    assert [r.M for r in rows] == [4, 8]
    assert rows[1].order == pytest.approx(math.log2(rows[0].l2_error / rows[1].l2_error))


def test_workers_preserve_order():
    cfg = ExperimentConfig(study="stability", N=(3, 5), M=(3, 4), workers=2)
    par = stability_sweep(cfg)
    ser = stability_sweep(ExperimentConfig(study="stability", N=(3, 5), M=(3, 4)))
    assert [(r.N, r.M) for r in par] == [(3, 3), (3, 4), (5, 3), (5, 4)]
    assert [r.l2_error for r in par] == [r.l2_error for r in ser]
    assert par[0].order is None and par[1].order is not None and par[2].order is None


@pytest.mark.parametrize("kwargs", [
    dict(study="bogus", N=(4,)),
    dict(study="temporal", N=()),
    dict(study="temporal", N=(4, 8), M=(4,)),
    dict(study="spatial", N=(4, 8), M=(2, 4)),
    dict(study="spatial", N=(4,)),
    dict(study="stability", N=(4,)),
    dict(study="temporal", N=(0,)),
    dict(study="temporal", N=(4,), grid="weird"),
    dict(study="temporal", N=(4,), problem="nope"),
    dict(study="temporal", N=(4,), T=0.0),
    dict(study="temporal", N=(4,), workers=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def _row(**kw):
    base = dict(study="temporal", problem="example51", grid="capped", seed=0, N=4, M=4,
                h=0.35355339, tau_max=0.5, r_max=2.0, l2_error=1.25e-3, order=None)
    base.update(kw)
    return ConvergenceRow(**base)


finite = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(errs=st.lists(finite, min_size=1, max_size=6), seed=st.integers(0, 2**63))
def test_csv_round_trip(tmp_path_factory, errs, seed):
    path = tmp_path_factory.mktemp("csv") / "rows.csv"
    rows = [_row(N=2 ** (i + 2), seed=seed + i, l2_error=e, order=None if i == 0 else 2.0)
            for i, e in enumerate(errs)]
    write_rows(rows, path)
    back = read_rows(path)
    # values survive to 8 significant digits and a second emission is byte identical
    for a, b in zip(rows, back):
        assert b.l2_error == pytest.approx(a.l2_error, rel=5e-8)
        assert (a.N, a.seed, a.order, a.status) == (b.N, b.seed, b.order, b.status)
    text = path.read_text()
    write_rows(back, path)
    assert path.read_text() == text
    assert read_rows(path) == back


def test_csv_header_and_format(tmp_path):
    path = write_rows([_row(status="blowup", l2_error=float("nan"))], tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].endswith(",nan,,blowup")
    assert format_float(1234.5678) == "1.2345678e+03"
    assert read_rows(path)[0].status == "blowup"
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_rows(bad)


def test_curve_data_files(tmp_path):
    rows = [_row(N=n, M=m, l2_error=1.0 / m) for n in (10, 20) for m in (4, 8)]
    paths = write_curve_data(rows, tmp_path / "stab")
    assert [p.name for p in paths] == ["stab_N10.dat", "stab_N20.dat"]
    data = np.loadtxt(paths[0], usecols=(0, 1))
    np.testing.assert_allclose(data, [[4, 0.25], [8, 0.125]])


def test_plateau_onset():
    assert plateau_onset([1.0, 0.25, 0.07, 0.05, 0.049]) == 2
    assert plateau_onset([1.0, 0.4, 0.1]) == 2
    assert plateau_onset([1.0, 0.8]) == 0
    assert plateau_onset([3.0]) == 0
    assert bounded_after_plateau([1.0, 0.25, 0.07, 0.05, 0.049, 0.05])
    assert not bounded_after_plateau([1.0, 0.25, 0.07, 0.2])
    assert not bounded_after_plateau([1.0, float("nan")])


def test_kernel_diagnostics_uniform():
    rep = kernel_diagnostics(uniform_grid(1.0, 50))
    for name in ("orthogonality", "complementary", "doc_telescoping", "dcc_telescoping",
                 "relation", "theta_rowsum", "p_rowsum"):
        assert getattr(rep, name) < 1e-12, name
    assert rep.min_theta > 0
    assert rep.max_p <= rep.two_tau
    assert rep.min_quadratic_theta >= 0
    assert json.loads(json.dumps(rep.as_dict()))["N"] == 50


def test_kernel_diagnostics_capped_and_uncapped():
    rep = kernel_diagnostics(random_grid(1.0, 200, GridPolicy("capped", seed=1)))
    assert rep.a1_satisfied and rep.max_p <= rep.two_tau + 1e-14
    assert rep.p_rowsum < 1e-11
    seeds = [s for s in range(20)
             if random_grid(1.0, 200, GridPolicy("uncapped", seed=s)).max_ratio > 4.8645]
    rep = kernel_diagnostics(random_grid(1.0, 200, GridPolicy("uncapped", seed=seeds[0])))
    assert not rep.a1_satisfied


# -- command line -------------------------------------------------------------

def test_cli_converge(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    assert main(["converge", "--N", "3,6", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [r.N for r in rows] == [3, 6] and rows[1].order is not None
    assert (tmp_path / "conv.png").stat().st_size > 0


def test_cli_stdout_and_list_forms(capsys):
    assert main(["converge", "--study", "spatial", "--N", "5", "--M", "3", "4",
                 "--grid", "uniform"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3


def test_cli_stability_files(tmp_path):
    out = tmp_path / "st.csv"
    assert main(["stability", "--problem", "heat", "--N", "4", "--M", "3,5", "--out", str(out)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"st.csv", "st_N4.dat", "st.gp", "st.png"} <= names
    assert "st_N4.dat" in (tmp_path / "st.gp").read_text()


def test_cli_kernels(tmp_path, capsys):
    out = tmp_path / "k.csv"
    assert main(["kernels", "--N", "6", "--grid", "capped", "--seed", "4", "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["N"] == 6 and report["orthogonality"] < 1e-12
    assert len(out.read_text().splitlines()) == 1 + 21
    assert (tmp_path / "k_grid.csv").exists()


def test_cli_solve(tmp_path, capsys):
    out = tmp_path / "solve.csv"
    assert main(["solve", "--N", "4", "--M", "4", "--out", str(out),
                 "--dump-mesh", str(tmp_path / "mesh.txt"),
                 "--dump-matrices", str(tmp_path / "mats")]) == 0
    steps = (tmp_path / "solve_steps.csv").read_text().splitlines()
    assert steps[0] == "n,t_n,l2_error" and len(steps) == 5
    assert (tmp_path / "mesh.txt").read_text().startswith("dim 2")
    A = mmread(str(tmp_path / "mats" / "stiffness.mtx"))
    assert A.shape == (9, 9)


@pytest.mark.parametrize("argv", [
    ["converge", "--N", "4", "--study", "spatial"],
    ["converge", "--N", "4,8", "--M", "4"],
    ["solve", "--N", "4,5", "--M", "3"],
    ["converge", "--N", "4", "--cap", "6.0"],
])
def test_cli_invalid_config_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_cli_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["converge", "--grid", "zigzag"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["converge", "--N", "x,y"])
    assert info.value.code == 2


def test_cli_failed_rows_exit_3(tmp_path):
    out = tmp_path / "fail.csv"
    assert main(["converge", "--N", "2", "--M", "6", "--cg-tol", "1e-300",
                 "--out", str(out), "--no-plot"]) == 3
    assert read_rows(out)[0].status == "solver-failure"
