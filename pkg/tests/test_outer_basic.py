"""Adaptive outer loop: level escalation, sufficient-decrease acceptance,
counters, and trace consistency."""

import numpy as np
import pytest

from tensormin.basic import accept_test_basic, initial_level, run_basic
from tensormin.inner import StopReason
from tensormin.oracles import ZeroComposite, quartic_oracle


def run_quartic(n, x0, m0, epsilon, **kw):
    oracle = quartic_oracle(n)
    x, report, rows = run_basic(
        oracle, ZeroComposite(), np.asarray(x0, dtype=float), m0, epsilon, **kw
    )
    return oracle, x, report, rows


# -- level selection and acceptance test ------------------------------------------


def test_initial_level_points():
    assert initial_level(1.0, 1.0) == 1
    assert initial_level(2.0, 1.0) == 0
    assert initial_level(1.5, 1.0) == 1
    assert initial_level(0.25, 1.0) == 3
    with pytest.raises(ValueError):
        initial_level(0.0, 1.0)
    with pytest.raises(ValueError):
        initial_level(1.0, -2.0)


def test_accept_test_points_and_boundary():
    assert accept_test_basic(5.0, 5.0, 0.0, 1.0) is True
    assert accept_test_basic(5.0, 5.0, 0.5, 1.0) is False
    # Unit decrease against unit gradient at level 1/216: the threshold is
    # exactly 1, so the test passes at equality.
    assert accept_test_basic(1.0, 0.0, 1.0, 1.0 / 216.0) is True
    assert accept_test_basic(1.0, 1e-9, 1.0, 1.0 / 216.0) is False


# -- terminal behavior --------------------------------------------------------------


def test_run_basic_already_stationary_start():
    oracle, x, report, rows = run_quartic(3, np.zeros(3), 1.0, 1e-8)
    assert report.converged is True
    assert report.IT == 1
    assert report.BGM_E == 1
    assert len(rows) == 1
    assert rows[0]["accepted"] is True
    assert np.array_equal(x, np.zeros(3))


def test_run_basic_quartic_converges_within_level_bounds():
    oracle, x, report, rows = run_quartic(2, [1.0, 1.0], 1.0, 1e-8)
    assert report.converged is True
    assert float(np.linalg.norm(oracle.grad(x))) <= 1e-8
    assert 1 <= report.IT <= 20

    # Every trial level sits at or above 2 M_0, and the running estimate
    # (half the accepted level) never exceeds max(2 M_0, 4 * 24) = 96.
    for row in rows:
        assert row["M_level"] >= 2.0 * (1.0 - 1e-12)
        assert row["M_level"] <= 192.0
        if row["accepted"]:
            assert row["M_level"] / 2.0 <= 96.0

    # Executions stay within the escalation-accounting budget.
    assert report.BGM_E <= 2 * (report.IT + 1) + np.log2(96.0)


def test_run_basic_acceptance_inequality_recomputed():
    rng = np.random.default_rng(30)
    x0 = rng.uniform(0.5, 1.5, size=3)
    oracle, _, report, rows = run_quartic(3, x0, 1.0, 1e-6)
    assert report.converged is True
    x_prev = x0
    checked = 0
    for row in rows:
        if not row["accepted"]:
            continue
        x_trial = row["x_trial"]
        f_trial = oracle.value(x_trial)
        g_trial = float(np.linalg.norm(oracle.grad(x_trial)))
        assert abs(f_trial - row["f_trial"]) <= 1e-12 * (1.0 + abs(f_trial))
        assert abs(g_trial - row["grad_norm_trial"]) <= 1e-12 * (1.0 + g_trial)
        if g_trial > 1e-6:
            f_at_prev = oracle.value(x_prev)
            rhs = g_trial ** (4.0 / 3.0) / (6.0 * row["M_level"] ** (1.0 / 3.0))
            assert f_at_prev - f_trial >= rhs - 1e-12 * (1.0 + abs(f_at_prev))
            # Monotone objective along accepted steps.
            assert f_trial <= f_at_prev + 1e-12 * (1.0 + abs(f_at_prev))
        x_prev = x_trial
        checked += 1
    assert checked >= 4


def test_run_basic_trace_levels_are_contiguous_doublings():
    oracle, _, report, rows = run_quartic(2, [1.0, 1.0], 1.0, 1e-6)
    assert report.BGM_E == len(rows)
    assert report.BGM_IT == sum(r["inner_iters"] for r in rows)

    m_t = 1.0
    by_t = {}
    for row in rows:
        by_t.setdefault(row["t"], []).append(row)
    for t in sorted(by_t):
        group = by_t[t]
        start = initial_level(m_t, 1.0)
        assert [r["i"] for r in group] == list(range(start, start + len(group)))
        for r in group:
            assert r["M_level"] == pytest.approx(m_t * 2.0 ** r["i"], rel=1e-12)
        # only the last row of a group may be accepted
        assert all(not r["accepted"] for r in group[:-1])
        if group[-1]["accepted"]:
            m_t = group[-1]["M_level"] / 2.0
        for r in group:
            if r["alpha"]:
                assert r["f_trial"] is None
                assert r["grad_norm_trial"] is None
                assert "x_trial" not in r
                assert r["stop_reason"] == "SlowConvergence"


def test_run_basic_oracle_call_conservation():
    oracle, _, report, rows = run_quartic(2, [1.0, 1.0], 1.0, 1e-6)
    snap = oracle.calls.snapshot()
    assert report.CO == oracle.calls.total() == sum(snap.values())
    evaluated = sum(1 for r in rows if r["f_trial"] is not None)
    anchors = len({r["t"] for r in rows})
    # one objective value at x_0 plus one per evaluated trial
    assert snap["value"] == 1 + evaluated
    # gradients likewise; all other gradient uses reuse anchor data
    assert snap["grad"] == 1 + evaluated
    # one Hessian (and one trace) per outer anchor, levels share it
    assert snap["hessian"] == anchors
    assert snap["trace"] == anchors


def test_run_basic_is_deterministic_except_wall_time():
    x0 = [0.8, -1.2, 0.4]
    _, x_a, rep_a, rows_a = run_quartic(3, x0, 1.0, 1e-7)
    _, x_b, rep_b, rows_b = run_quartic(3, x0, 1.0, 1e-7)
    assert np.array_equal(x_a, x_b)
    assert (rep_a.IT, rep_a.CO, rep_a.BGM_E, rep_a.BGM_IT) == (
        rep_b.IT, rep_b.CO, rep_b.BGM_E, rep_b.BGM_IT
    )
    assert rep_a.final_grad_norm == rep_b.final_grad_norm
    assert rep_a.final_f == rep_b.final_f
    assert len(rows_a) == len(rows_b)
    for ra, rb in zip(rows_a, rows_b):
        assert ra["t"] == rb["t"] and ra["i"] == rb["i"]
        assert ra["M_level"] == rb["M_level"]
        assert ra["accepted"] == rb["accepted"]


def test_run_basic_epsilon_sweep_marginal_cost_grows():
    its = []
    inner_totals = []
    for eps in (1e-2, 1e-4, 1e-6, 1e-8):
        _, _, report, _ = run_quartic(2, [1.0, 1.0], 1.0, eps)
        assert report.converged is True
        its.append(report.IT)
        inner_totals.append(report.BGM_IT)
    assert its == sorted(its)
    assert inner_totals == sorted(inner_totals)


def test_run_basic_no_slow_certificates_above_curvature():
    # Starting the level estimate above 4 L_f means every trial level exceeds
    # the certificate threshold, so alpha can never fire.
    oracle, _, report, rows = run_quartic(2, [1.0, 1.0], 64.0, 1e-6)
    assert report.converged is True
    for row in rows:
        assert row["M_level"] >= 96.0
        assert row["alpha"] is False


def test_run_basic_outer_cap_reports_honestly():
    _, _, report, rows = run_quartic(2, [1.0, 1.0], 1.0, 1e-12, max_outer=2)
    assert report.converged is False
    assert report.IT == 2
    assert report.final_grad_norm > 1e-12


def test_run_basic_inner_cap_aborts_run():
    oracle, x, report, rows = run_quartic(2, [1.0, 1.0], 1.0, 1e-10, max_inner=1)
    assert report.converged is False
    assert report.IT == 0
    assert rows[-1]["stop_reason"] == StopReason.ITERATION_CAP.value
    assert rows[-1]["accepted"] is False
    assert rows[-1]["f_trial"] is None
    assert np.array_equal(x, np.array([1.0, 1.0]))


def test_run_basic_trace_sink_sees_both_levels_of_detail():
    sink = []
    oracle = quartic_oracle(2)
    _, report, rows = run_basic(
        oracle, ZeroComposite(), np.array([1.0, 1.0]), 1.0, 1e-6,
        trace_sink=sink.append,
    )
    outer = [r for r in sink if r["kind"] == "outer"]
    inner = [r for r in sink if r["kind"] == "inner"]
    assert len(outer) == len(rows)
    assert len(inner) == report.BGM_IT
    outer_keys = {(r["t"], r["i"]) for r in outer}
    for r in inner:
        assert (r["t"], r["i"]) in outer_keys
        assert {"k", "model_grad_norm", "step_norm", "slow_rhs"} <= set(r)


def test_run_basic_rejects_bad_parameters():
    oracle = quartic_oracle(2)
    with pytest.raises(ValueError):
        run_basic(oracle, ZeroComposite(), np.ones(2), 1.0, 0.0)
    with pytest.raises(ValueError):
        run_basic(oracle, ZeroComposite(), np.ones(2), -1.0, 1e-6)
