"""Accelerated outer loop: estimating sequence with a quartic prox term.

The accelerated method keeps, besides the iterate x_t, a dual center v_t that
minimizes an estimating function

    phi_t(x) = 1/4 ||x - x_0||^4 + <lin_acc, x> + phi_const,

built from the linearizations of accepted steps.  Trial anchors are mixtures
z = (1 - gamma) x_t + gamma v_t with gamma = a / (A + a), where the step
weight a solves  a^4 = 4^2 (A + a)^3 / (18^3 M)  at the current level M.
Acceptance asks the trial gradient to make a quantified angle with z - x_plus
rather than a raw decrease, which is what lets the method keep the t^{-4}
estimating-sequence rate.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .basic import _MAX_LEVEL_DOUBLINGS, _make_report, initial_level
from .inner import InnerConfig, StopReason, run_inner
from .model import ModelAnchor

logger = logging.getLogger(__name__)

_SCALE = 18.0**3  # 5832; the weight equation's fixed scaling


def solve_a(a_prev_total, m_level, tol=1e-12):
    """Positive root a of  18^3 M a^4 = 16 (A + a)^3  for A = a_prev_total.

    a^4 / (A + a)^3 is strictly increasing on a > 0, so the root is unique.
    A = 0 has the closed form a = 16 / (18^3 M).  The root satisfies
    |18^3 M a^4 - 16 (A + a)^3| <= tol * (1 + 16 (A + a)^3).
    """
    A = float(a_prev_total)
    if A < 0.0:
        raise ValueError("accumulated weight A must be nonnegative")
    if m_level <= 0.0:
        raise ValueError("level M must be positive")
    coef = _SCALE * m_level
    if A == 0.0:
        return 16.0 / coef

    def u(a):
        s = A + a
        return coef * a**4 - 16.0 * s * s * s

    hi = max(1.0, A, 32.0 / coef)
    guard = 0
    while u(hi) <= 0.0:
        hi *= 2.0
        guard += 1
        if guard > 400:
            raise RuntimeError("weight-equation bracket expansion failed")

    a = brentq(u, 0.0, hi, xtol=max(hi * 1e-16, 1e-300), rtol=1e-15, maxiter=200)

    for _ in range(3):  # Newton polish to rounding level
        s = A + a
        val = coef * a**4 - 16.0 * s**3
        if val == 0.0:
            break
        slope = 4.0 * coef * a**3 - 48.0 * s * s
        if slope <= 0.0:
            break
        a_new = a - val / slope
        if not (0.0 < a_new <= hi):
            break
        if a_new == a:
            break
        a = a_new

    s = A + a
    res = abs(coef * a**4 - 16.0 * s**3)
    if res > tol * (1.0 + 16.0 * s**3):
        raise RuntimeError("weight-equation residual %.3e exceeds tolerance" % res)
    return a


def mix_z(x_t, v_t, a_total, a_t):
    """Anchor mixture z = (1 - gamma) x_t + gamma v_t, gamma = a_t / (A + a_t)."""
    gamma = a_t / (a_total + a_t)
    return (1.0 - gamma) * np.asarray(x_t, dtype=float) + gamma * np.asarray(
        v_t, dtype=float
    )


def accept_test_accel(grad_trial, z, x_trial, m_level):
    """Accept when <grad(trial), z - trial> >= ||grad(trial)||^(4/3) / (6 M^(1/3))."""
    g = np.asarray(grad_trial, dtype=float)
    lhs = float(np.dot(g, np.asarray(z, dtype=float) - np.asarray(x_trial, dtype=float)))
    rhs = float(np.linalg.norm(g)) ** (4.0 / 3.0) / (6.0 * m_level ** (1.0 / 3.0))
    return lhs >= rhs


@dataclass
class AccelState:
    """Estimating-sequence state of the accelerated method.

    Invariants: ``a_total`` starts at 0 with ``v = x0``; after every update
    ``v = x0 - lin_acc / ||lin_acc||^(2/3)`` (so ``||v - x0||^3 = ||lin_acc||``)
    minimizes phi_t in closed form.
    """

    x0: np.ndarray
    x: np.ndarray
    v: np.ndarray
    lin_acc: np.ndarray
    phi_const: float
    a_total: float
    m: float
    t: int

    @classmethod
    def fresh(cls, x0, m0):
        x0 = np.asarray(x0, dtype=float).copy()
        return cls(
            x0=x0,
            x=x0.copy(),
            v=x0.copy(),
            lin_acc=np.zeros_like(x0),
            phi_const=0.0,
            a_total=0.0,
            m=float(m0),
            t=0,
        )


def phi_min_value(state):
    """phi_t at its minimizer v_t:  1/4 ||v - x0||^4 + <lin_acc, v> + const."""
    d = state.v - state.x0
    nsq = float(np.dot(d, d))
    return 0.25 * nsq * nsq + float(np.dot(state.lin_acc, state.v)) + state.phi_const


def update_phi_and_v(state, a_t, grad_xnext, f_xnext, x_next):
    """Fold an accepted step into the estimating sequence.

    Adds a_t times the linearization of f at x_next to phi, which shifts the
    accumulated linear term and its constant; the new minimizer of
    1/4 ||x - x0||^4 + <lin, x> is closed-form:

        v = x0 - lin / ||lin||^(2/3)      (v = x0 when lin = 0).
    """
    grad_xnext = np.asarray(grad_xnext, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    lin = state.lin_acc + a_t * grad_xnext
    const = state.phi_const + a_t * (float(f_xnext) - float(np.dot(grad_xnext, x_next)))
    lin_norm = float(np.linalg.norm(lin))
    if lin_norm == 0.0:
        v = state.x0.copy()
    else:
        v = state.x0 - lin / lin_norm ** (2.0 / 3.0)
    return replace(
        state,
        x=x_next.copy(),
        v=v,
        lin_acc=lin,
        phi_const=const,
        a_total=state.a_total + a_t,
        t=state.t + 1,
    )


def run_accel(
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
    """Accelerated minimization of f + psi to gradient norm <= epsilon.

    Same contract as ``run_basic``; trial anchors are the mixtures z rather
    than the iterate, and every accepted step also updates the estimating
    sequence.  Trial rows additionally carry the weight a, the mixture
    coefficient gamma, the dual-center distance ||v - x0||, and the
    estimating-function minimum before the step (``phi_star``) plus, on
    accepted rows, the post-step total weight and minimum
    (``a_total_next``, ``phi_star_next``).  Evaluated trials carry the trial
    point (``x_trial``), as in ``run_basic``.
    """
    t_start = time.perf_counter()
    calls_start = oracle.calls.total()

    x0 = np.asarray(x0, dtype=float)
    if not composite.in_domain(x0):
        raise ValueError("x0 lies outside the composite term's domain")
    eps = float(epsilon)
    if eps <= 0.0:
        raise ValueError("epsilon must be positive")

    state = AccelState.fresh(x0, m0)
    it = 0
    bgm_e = 0
    bgm_it = 0
    rows = []
    converged = False
    final_gnorm = np.inf
    final_f = np.inf

    def emit(row):
        rows.append(row)
        if trace_sink is not None:
            trace_sink(dict(row, kind="outer"))

    for t in range(max_outer):
        if converged:
            break
        i = initial_level(state.m, m0)
        doublings = 0

        while True:
            m_level = state.m * 2.0**i
            a_t = solve_a(state.a_total, m_level, tol=secular_tol)
            z = mix_z(state.x, state.v, state.a_total, a_t)
            gamma = a_t / (state.a_total + a_t)
            anchor = ModelAnchor.from_oracle(oracle, z, m_level)
            gnorm_z = float(np.linalg.norm(anchor.g_x))
            v_dist = float(np.linalg.norm(state.v - state.x0))
            phi_star = phi_min_value(state)

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
                gnorm_z,
                trace=inner_trace,
            )
            bgm_e += 1
            bgm_it += res.iterations

            base_row = {
                "t": t, "i": i, "M_level": m_level, "alpha": res.alpha,
                "inner_iters": res.iterations, "a": a_t, "gamma": gamma,
                "a_total": state.a_total, "v_dist": v_dist, "phi_star": phi_star,
                "stop_reason": res.stop_reason.value,
            }

            if res.stop_reason is StopReason.ITERATION_CAP:
                logger.warning(
                    "inner iteration cap %d hit at outer t=%d level %g; aborting run",
                    max_inner, t, m_level,
                )
                emit(dict(base_row, f_trial=None, grad_norm_trial=None,
                          accepted=False))
                report = _make_report(eps, it, oracle, calls_start, bgm_e, bgm_it,
                                      final_gnorm, final_f, t_start, False)
                return state.x, report, rows

            if res.alpha:
                emit(dict(base_row, f_trial=None, grad_norm_trial=None,
                          accepted=False))
                i += 1
                doublings += 1
                if doublings > _MAX_LEVEL_DOUBLINGS:
                    raise RuntimeError("level doubling did not terminate")
                continue

            x_plus = res.x_plus
            g_smooth = oracle.grad(x_plus)
            g_plus = g_smooth + res.g_psi
            gnorm_plus = float(np.linalg.norm(g_plus))

            if gnorm_plus <= eps:
                it += 1
                f_plus = oracle.value(x_plus) + composite.value(x_plus)
                state = replace(state, x=np.asarray(x_plus, dtype=float).copy())
                final_gnorm = gnorm_plus
                final_f = f_plus
                converged = True
                emit(dict(base_row, f_trial=f_plus, grad_norm_trial=gnorm_plus,
                          accepted=True, x_trial=np.array(x_plus)))
                break

            accepted = accept_test_accel(g_plus, z, x_plus, m_level)
            if accepted:
                it += 1
                f_plus = oracle.value(x_plus) + composite.value(x_plus)
                f_smooth = f_plus - composite.value(x_plus)
                state = update_phi_and_v(state, a_t, g_smooth, f_smooth, x_plus)
                state = replace(state, m=m_level / 2.0)
                final_gnorm = gnorm_plus
                final_f = f_plus
                emit(dict(base_row, f_trial=f_plus, grad_norm_trial=gnorm_plus,
                          accepted=True, x_trial=np.array(x_plus),
                          a_total_next=state.a_total,
                          phi_star_next=phi_min_value(state)))
                break

            emit(dict(base_row, f_trial=None, grad_norm_trial=gnorm_plus,
                      accepted=False, x_trial=np.array(x_plus)))
            i += 1
            doublings += 1
            if doublings > _MAX_LEVEL_DOUBLINGS:
                raise RuntimeError("level doubling did not terminate")

    if not converged:
        logger.warning("outer iteration cap %d hit at epsilon %g", max_outer, eps)
        if not np.isfinite(final_f):
            final_f = oracle.value(state.x) + composite.value(state.x)
            final_gnorm = float(np.linalg.norm(oracle.grad(state.x)))

    report = _make_report(eps, it, oracle, calls_start, bgm_e, bgm_it,
                          final_gnorm, final_f, t_start, converged)
    return state.x, report, rows
