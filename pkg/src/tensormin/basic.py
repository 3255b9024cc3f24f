"""Adaptive outer loop: accept third-order trial steps, adapt the level M.

Each outer iteration freezes an anchor at the current iterate, runs the
Bregman-gradient inner solver at geometrically increasing levels 2^i M_t
until the slow-convergence flag clears and the trial point passes a
sufficient-decrease test, then halves the level estimate for the next
iteration.  The level therefore tracks the (unknown) third-derivative
Lipschitz constant from below without ever being told it.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from .inner import InnerConfig, StopReason, run_inner
from .model import ModelAnchor
from .reports import RunReport

logger = logging.getLogger(__name__)

# A level loop that doubles this many times without resolution indicates an
# oracle violating the convexity/smoothness contract.
_MAX_LEVEL_DOUBLINGS = 200


def initial_level(m_t, m_0):
    """Smallest i >= 0 with 2^i m_t >= 2 m_0 (every trial level stays >= 2 m_0)."""
    if m_t <= 0.0 or m_0 <= 0.0:
        raise ValueError("levels must be positive")
    i = 0
    level = float(m_t)
    target = 2.0 * float(m_0)
    while level < target:
        level *= 2.0
        i += 1
        if i > _MAX_LEVEL_DOUBLINGS:
            raise RuntimeError("initial level search did not terminate")
    return i


def accept_test_basic(f_x, f_trial, grad_norm_trial, m_level):
    """Sufficient decrease:  f(x) - f(trial) >= ||grad(trial)||^(4/3) / (6 M^(1/3))."""
    rhs = grad_norm_trial ** (4.0 / 3.0) / (6.0 * m_level ** (1.0 / 3.0))
    return f_x - f_trial >= rhs


def run_basic(
    oracle,
    composite,
    x0,
    m0,
    epsilon,
    max_outer=100000,
    max_inner=10000,
    secular_tol=1e-12,
    trace_sink=None,
):
    """Minimize f + psi to gradient norm <= epsilon with the adaptive method.

    Parameters
    ----------
    oracle : SmoothOracle
        Smooth part (convex, third derivative Lipschitz).
    composite : CompositeTerm
        Simple convex term; only the zero kind ships.
    x0 : array
        Starting point (must lie in the composite domain).
    m0 : float
        Initial level estimate; every trial level is kept >= 2 m0.
    epsilon : float
        Target composite gradient norm.
    max_outer, max_inner : int
        Iteration caps; hitting either aborts the run with ``converged=False``.
    secular_tol : float
        Residual tolerance of the inner solver's step subproblems.
    trace_sink : callable, optional
        Receives one dict per inner iteration and per outer trial, tagged
        with ``kind``.

    Returns
    -------
    (x, report, rows) : (ndarray, RunReport, list of dict)
        Final iterate, run counters, and the outer trial rows: one dict per
        level attempt with the level, flag, inner iteration count, trial
        objective/gradient data, and whether the trial was accepted.
        Evaluated trials also carry the trial point itself (``x_trial``) so
        tests can recompute the acceptance inequality from scratch.
        Slow-convergence trials carry ``f_trial = grad_norm_trial = None``
        and no ``x_trial`` (the algorithm never evaluates them).
    """
    t_start = time.perf_counter()
    calls_start = oracle.calls.total()

    x = np.asarray(x0, dtype=float).copy()
    if not composite.in_domain(x):
        raise ValueError("x0 lies outside the composite term's domain")
    m_t = float(m0)
    eps = float(epsilon)
    if eps <= 0.0:
        raise ValueError("epsilon must be positive")

    f_x = oracle.value(x) + composite.value(x)
    g_x = oracle.grad(x)
    gnorm_x = float(np.linalg.norm(g_x))

    it = 0
    bgm_e = 0
    bgm_it = 0
    rows = []
    converged = False
    final_gnorm = gnorm_x
    final_f = f_x

    def emit(row):
        rows.append(row)
        if trace_sink is not None:
            trace_sink(dict(row, kind="outer"))

    for t in range(max_outer):
        if converged:
            break
        i = initial_level(m_t, m0)
        base_anchor = ModelAnchor.from_oracle(oracle, x, m_t * 2.0**i, f_x=f_x, g_x=g_x)
        doublings = 0

        while True:
            m_level = m_t * 2.0**i
            anchor = base_anchor.with_m(m_level)
            inner_trace = None
            if trace_sink is not None:
                inner_trace = lambda r, _t=t, _i=i: trace_sink(
                    dict(r, kind="inner", t=_t, i=_i)
                )
            res = run_inner(
                anchor,
                oracle,
                composite,
                InnerConfig(epsilon=eps, max_inner=max_inner, secular_tol=secular_tol),
                gnorm_x,
                trace=inner_trace,
            )
            bgm_e += 1
            bgm_it += res.iterations

            if res.stop_reason is StopReason.ITERATION_CAP:
                logger.warning(
                    "inner iteration cap %d hit at outer t=%d level %g; aborting run",
                    max_inner, t, m_level,
                )
                emit({"t": t, "i": i, "M_level": m_level, "alpha": res.alpha,
                      "inner_iters": res.iterations, "f_trial": None,
                      "grad_norm_trial": None, "accepted": False,
                      "stop_reason": res.stop_reason.value})
                report = _make_report(eps, it, oracle, calls_start, bgm_e, bgm_it,
                                      final_gnorm, final_f, t_start, False)
                return x, report, rows

            if res.alpha:
                # Level certified too small; never evaluate this trial.
                emit({"t": t, "i": i, "M_level": m_level, "alpha": True,
                      "inner_iters": res.iterations, "f_trial": None,
                      "grad_norm_trial": None, "accepted": False,
                      "stop_reason": res.stop_reason.value})
                i += 1
                doublings += 1
                if doublings > _MAX_LEVEL_DOUBLINGS:
                    raise RuntimeError("level doubling did not terminate")
                continue

            x_plus = res.x_plus
            g_plus = oracle.grad(x_plus) + res.g_psi
            gnorm_plus = float(np.linalg.norm(g_plus))
            f_plus = oracle.value(x_plus) + composite.value(x_plus)

            if gnorm_plus <= eps:
                it += 1
                x = x_plus
                final_gnorm = gnorm_plus
                final_f = f_plus
                converged = True
                emit({"t": t, "i": i, "M_level": m_level, "alpha": False,
                      "inner_iters": res.iterations, "f_trial": f_plus,
                      "grad_norm_trial": gnorm_plus, "accepted": True,
                      "x_trial": np.array(x_plus),
                      "stop_reason": res.stop_reason.value})
                break

            accepted = accept_test_basic(f_x, f_plus, gnorm_plus, m_level)
            emit({"t": t, "i": i, "M_level": m_level, "alpha": False,
                  "inner_iters": res.iterations, "f_trial": f_plus,
                  "grad_norm_trial": gnorm_plus, "accepted": accepted,
                  "x_trial": np.array(x_plus),
                  "stop_reason": res.stop_reason.value})

            if accepted:
                it += 1
                x = x_plus
                f_x = f_plus
                g_x = g_plus
                gnorm_x = gnorm_plus
                final_gnorm = gnorm_plus
                final_f = f_plus
                m_t = m_level / 2.0
                break

            i += 1
            doublings += 1
            if doublings > _MAX_LEVEL_DOUBLINGS:
                raise RuntimeError("level doubling did not terminate")

    if not converged:
        logger.warning("outer iteration cap %d hit at epsilon %g", max_outer, eps)

    report = _make_report(eps, it, oracle, calls_start, bgm_e, bgm_it,
                          final_gnorm, final_f, t_start, converged)
    return x, report, rows


def _make_report(eps, it, oracle, calls_start, bgm_e, bgm_it,
                 final_gnorm, final_f, t_start, converged):
    return RunReport(
        epsilon=eps,
        IT=it,
        CO=oracle.calls.total() - calls_start,
        BGM_E=bgm_e,
        BGM_IT=bgm_it,
        BGM_A=bgm_it / bgm_e if bgm_e else 0.0,
        final_grad_norm=final_gnorm,
        final_f=final_f,
        wall_time_s=time.perf_counter() - t_start,
        converged=converged,
    )
