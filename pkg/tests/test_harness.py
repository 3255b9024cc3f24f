"""Experiment harness and CLI: dataset ingestion, sweeps, report formats,
exit codes."""

import io
import json

import numpy as np
import pytest

from tensormin.cli import main
from tensormin.harness import (
    CSV_HEADER,
    RunConfig,
    bundled_dataset_path,
    emit_report,
    load_dataset,
    parse_report_csv,
    run_experiment,
)
from tensormin.reports import RunReport


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- dataset loading ---------------------------------------------------------------


def test_load_dataset_prepends_intercept(tmp_path):
    data = load_dataset(write(tmp_path, "d.csv", "1,0\n2,1\n"))
    assert np.array_equal(data.features, [[1.0, 1.0], [1.0, 2.0]])
    assert np.array_equal(data.labels, [0.0, 1.0])
    assert data.n_samples == 2
    assert data.dim == 2


def test_load_dataset_header_flag(tmp_path):
    plain = load_dataset(write(tmp_path, "a.csv", "1,0\n2,1\n"))
    headed = load_dataset(
        write(tmp_path, "b.csv", "feat,label\n1,0\n2,1\n"), has_header=True
    )
    assert np.array_equal(plain.features, headed.features)
    assert np.array_equal(plain.labels, headed.labels)


def test_load_dataset_skips_blank_lines(tmp_path):
    data = load_dataset(write(tmp_path, "d.csv", "1,0\n\n2,1\n\n"))
    assert data.n_samples == 2


def test_load_dataset_error_diagnostics(tmp_path):
    with pytest.raises(ValueError, match="row 2 label"):
        load_dataset(write(tmp_path, "lab.csv", "1,0\n1,2\n"))
    with pytest.raises(ValueError, match="row 2 has 3 columns, expected 2"):
        load_dataset(write(tmp_path, "rag.csv", "1,0\n1,2,0\n"))
    with pytest.raises(ValueError, match="row 1 contains a non-numeric cell"):
        load_dataset(write(tmp_path, "txt.csv", "one,0\n"))
    with pytest.raises(ValueError, match="row 1 has 1 columns"):
        load_dataset(write(tmp_path, "thin.csv", "1\n0\n"))
    with pytest.raises(ValueError, match="no data rows"):
        load_dataset(write(tmp_path, "empty.csv", "\n\n"))


def test_bundled_dataset_loads():
    data = load_dataset(bundled_dataset_path())
    assert data.features.shape == (100, 4)
    assert np.array_equal(data.features[:, 0], np.ones(100))
    assert set(np.unique(data.labels)) <= {0.0, 1.0}


# -- run configuration ----------------------------------------------------------------


def test_run_config_validation():
    RunConfig(problem="logistic")  # bundled dataset fills in
    RunConfig(problem="quartic", n=3)
    with pytest.raises(ValueError):
        RunConfig(problem="ridge")
    with pytest.raises(ValueError):
        RunConfig(problem="quartic", n=2, solver="newton")
    with pytest.raises(ValueError):
        RunConfig(problem="quartic", n=2, epsilons=[])
    with pytest.raises(ValueError):
        RunConfig(problem="quartic", n=2, epsilons=[1e-2, 0.0])
    with pytest.raises(ValueError):
        RunConfig(problem="quartic", n=2, m0=0.0)
    with pytest.raises(ValueError):
        RunConfig(problem="quartic")  # missing dimension
    with pytest.raises(ValueError):
        RunConfig(problem="quartic", n=2, dataset_path="x.csv")
    with pytest.raises(ValueError):
        RunConfig(problem="quartic", n=2, fd_tau=0.0)


# -- experiment sweeps ------------------------------------------------------------------


def test_experiment_quartic_basic_sweep_reaches_targets():
    eps = [1e-2, 1e-4, 1e-6, 1e-8]
    reports = run_experiment(RunConfig(problem="quartic", n=2, epsilons=eps))
    assert [r.epsilon for r in reports] == eps
    for r, e in zip(reports, eps):
        assert r.converged is True
        assert r.final_grad_norm <= e
        assert r.BGM_E >= r.IT
        assert abs(r.BGM_A * r.BGM_E - r.BGM_IT) <= 1e-9 * max(1, r.BGM_IT)
    its = [r.IT for r in reports]
    inner = [r.BGM_IT for r in reports]
    assert its == sorted(its)
    assert inner == sorted(inner)


def test_experiment_accel_sweep_cost_grows_with_accuracy():
    reports = run_experiment(
        RunConfig(problem="quartic", n=2, solver="accel", epsilons=[1e-1, 1e-2, 1e-3])
    )
    assert all(r.converged for r in reports)
    its = [r.IT for r in reports]
    assert its == sorted(its)
    assert [r.BGM_IT for r in reports] == sorted(r.BGM_IT for r in reports)


def test_experiment_fresh_counters_per_accuracy():
    reports = run_experiment(
        RunConfig(problem="quartic", n=2, epsilons=[1e-2, 1e-2])
    )
    a, b = reports
    assert (a.IT, a.CO, a.BGM_E, a.BGM_IT) == (b.IT, b.CO, b.BGM_E, b.BGM_IT)
    assert a.final_f == b.final_f


def test_experiment_logistic_bundled_dataset():
    reports = run_experiment(
        RunConfig(problem="logistic", epsilons=[1e-2, 1e-4])
    )
    for r in reports:
        assert r.converged is True
        assert r.final_grad_norm <= r.epsilon
        assert 1.0 <= r.BGM_A <= 30.0


def test_experiment_errors_annotated_with_accuracy(tmp_path):
    cfg = RunConfig(
        problem="logistic",
        dataset_path=str(tmp_path / "missing.csv"),
        epsilons=[1e-2],
    )
    with pytest.raises(OSError, match="epsilon=0.01"):
        run_experiment(cfg)
    bad_x0 = RunConfig(problem="quartic", n=3, x0=np.zeros(2), epsilons=[1e-2])
    with pytest.raises(ValueError, match="epsilon=0.01"):
        run_experiment(bad_x0)


def test_experiment_start_point_policies():
    zeros = run_experiment(
        RunConfig(problem="quartic", n=3, x0="zeros", epsilons=[1e-6])
    )[0]
    assert zeros.IT == 1  # stationary start
    explicit = run_experiment(
        RunConfig(problem="quartic", n=3, x0=np.zeros(3), epsilons=[1e-6])
    )[0]
    assert explicit.IT == 1


def test_experiment_runs_are_deterministic():
    cfg = dict(problem="quartic", n=3, epsilons=[1e-4])
    a = run_experiment(RunConfig(**cfg))[0]
    b = run_experiment(RunConfig(**cfg))[0]
    assert (a.IT, a.CO, a.BGM_E, a.BGM_IT, a.final_grad_norm, a.final_f) == (
        b.IT, b.CO, b.BGM_E, b.BGM_IT, b.final_grad_norm, b.final_f
    )


def test_experiment_finite_difference_mode():
    report = run_experiment(
        RunConfig(problem="quartic", n=2, fd_tau=1e-4, epsilons=[1e-4])
    )[0]
    assert report.converged is True
    assert report.final_grad_norm <= 1e-4


def test_experiment_trace_rows_tagged_with_accuracy():
    rows = []
    run_experiment(
        RunConfig(problem="quartic", n=2, epsilons=[1e-2, 1e-3]),
        trace_sink=rows.append,
    )
    assert rows
    assert {r["epsilon"] for r in rows} == {1e-2, 1e-3}
    kinds = {r["kind"] for r in rows}
    assert kinds == {"outer", "inner"}


# -- report emission ----------------------------------------------------------------------


def sample_report():
    return RunReport(
        epsilon=1e-2, IT=4, CO=20, BGM_E=5, BGM_IT=62, BGM_A=12.4,
        final_grad_norm=0.009, final_f=1.5, wall_time_s=0.01,
    )


def test_emit_report_table_layout():
    sink = io.StringIO()
    text = emit_report([sample_report()], format="table", sink=sink)
    assert text == sink.getvalue()
    lines = text.splitlines()
    assert lines[0] == "epsilon  IT  CO  BGM-E  BGM-IT    BGM-A"
    assert lines[1] == "  1e-02   4  20      5      62  12.4000"


def test_emit_report_csv_layout_and_round_trip():
    sink = io.StringIO()
    text = emit_report([sample_report()], format="csv", sink=sink)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "0.01,4,20,5,62,12.4000,0.009,1.5,0.01"

    # Round-trip through the parser: everything reproduces exactly except
    # BGM_A, which is serialized with four decimals by design.
    original = RunReport(
        epsilon=1e-6, IT=13, CO=77, BGM_E=14, BGM_IT=201, BGM_A=201 / 14,
        final_grad_norm=3.4e-7, final_f=62.0884421, wall_time_s=0.1234,
    )
    back = parse_report_csv(emit_report([original], format="csv", sink=io.StringIO()))
    assert len(back) == 1
    r = back[0]
    assert (r.epsilon, r.IT, r.CO, r.BGM_E, r.BGM_IT) == (
        original.epsilon, original.IT, original.CO, original.BGM_E, original.BGM_IT
    )
    assert r.final_grad_norm == original.final_grad_norm
    assert r.final_f == original.final_f
    assert r.wall_time_s == original.wall_time_s
    assert abs(r.BGM_A - original.BGM_A) <= 5e-5


def test_emit_report_json_lines_and_alias():
    text = emit_report([sample_report()], format="jsonl", sink=io.StringIO())
    record = json.loads(text.splitlines()[0])
    assert record["epsilon"] == 1e-2
    assert record["IT"] == 4
    assert record["BGM_A"] == 12.4
    alias = emit_report([sample_report()], format="json-lines", sink=io.StringIO())
    assert alias == text


def test_emit_report_rejects_bad_calls():
    with pytest.raises(ValueError):
        emit_report([], format="table", sink=io.StringIO())
    with pytest.raises(ValueError):
        emit_report([sample_report()], format="yaml", sink=io.StringIO())


# -- command-line interface ---------------------------------------------------------------


def test_cli_quartic_csv_report(tmp_path):
    out = tmp_path / "report.csv"
    code = main([
        "solve", "--problem", "quartic", "--n", "2", "--solver", "basic",
        "--eps", "1e-2,1e-4", "--format", "csv", "--out", str(out),
    ])
    assert code == 0
    reports = parse_report_csv(out.read_text())
    assert [r.epsilon for r in reports] == [1e-2, 1e-4]
    assert all(r.final_grad_norm <= r.epsilon for r in reports)


def test_cli_table_to_stdout(capsys):
    code = main([
        "solve", "--problem", "quartic", "--n", "2", "--solver", "accel",
        "--eps", "1e-1",
    ])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["epsilon", "IT", "CO", "BGM-E", "BGM-IT", "BGM-A"]
    assert len(lines) == 2


def test_cli_exit_two_when_cap_hit(tmp_path):
    code = main([
        "solve", "--problem", "quartic", "--n", "2", "--solver", "basic",
        "--eps", "1e-10", "--max-inner", "1",
        "--format", "csv", "--out", str(tmp_path / "r.csv"),
    ])
    assert code == 2


def test_cli_usage_and_io_errors_exit_one(tmp_path, capsys):
    assert main(["solve", "--problem", "quartic", "--n", "2",
                 "--solver", "basic"]) == 1  # missing --eps
    assert main(["solve", "--problem", "quartic", "--n", "2",
                 "--solver", "basic", "--eps", "abc"]) == 1
    assert main(["solve", "--problem", "quartic",
                 "--solver", "basic", "--eps", "1e-2"]) == 1  # missing --n
    assert main(["solve", "--problem", "logistic", "--solver", "basic",
                 "--eps", "1e-2", "--dataset",
                 str(tmp_path / "nope.csv")]) == 1
    capsys.readouterr()  # drain the error messages


def test_cli_zero_start_immediate_success(tmp_path):
    out = tmp_path / "r.csv"
    code = main([
        "solve", "--problem", "quartic", "--n", "4", "--solver", "accel",
        "--eps", "1e-8", "--x0", "zeros", "--format", "csv", "--out", str(out),
    ])
    assert code == 0
    assert parse_report_csv(out.read_text())[0].IT == 1


def test_cli_trace_stream_is_json_lines(tmp_path):
    trace = tmp_path / "trace.jsonl"
    code = main([
        "solve", "--problem", "quartic", "--n", "2", "--solver", "basic",
        "--eps", "1e-3", "--trace", str(trace),
        "--format", "csv", "--out", str(tmp_path / "r.csv"),
    ])
    assert code == 0
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert rows
    kinds = {r["kind"] for r in rows}
    assert kinds == {"outer", "inner"}
    for r in rows:
        assert r["epsilon"] == 1e-3
        if r["kind"] == "inner":
            assert {"k", "model_grad_norm", "step_norm", "slow_rhs"} <= set(r)
    evaluated = [r for r in rows if r["kind"] == "outer" and "x_trial" in r]
    assert evaluated
    assert all(isinstance(r["x_trial"], list) for r in evaluated)


def test_cli_finite_difference_flag(tmp_path):
    code = main([
        "solve", "--problem", "quartic", "--n", "2", "--solver", "basic",
        "--eps", "1e-4", "--fd-tau", "1e-4",
        "--format", "csv", "--out", str(tmp_path / "r.csv"),
    ])
    assert code == 0
