"""Third-order Taylor model with quartic regularization around a frozen anchor.

Around an anchor point x with gradient g, Hessian H and directional third
derivative T(h) = D3f(x)[h]^2, the pieces are

    Phi(y)   = f(x) + <g, h> + 1/2 <H h, h> + 1/6 <T(h), h>,      h = y - x
    d4(h)    = 1/4 ||h||^4
    Omega(y) = Phi(y) + (M / 2) d4(h)
    rho(y)   = 1/2 <H h, h> + (M / 2) d4(h)

rho is the scaling function relative to which Omega is smooth and convex; its
Bregman divergence drives the inner solver.  All oracle data at the anchor is
evaluated once and frozen; only the directional third derivative is queried
per displacement, with a small memo so value+gradient at the same trial point
cost a single oracle call.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# Eigenvalues of the anchor Hessian below this are a convexity violation;
# values in [-EIG_FLOOR, 0) are treated as rounding noise and clamped to 0.
EIG_FLOOR = 1e-10

_MEMO_CAP = 8


class ConvexityError(RuntimeError):
    """The anchor Hessian has an eigenvalue below -1e-10."""


def d4_value(h):
    """Quartic regularizer 1/4 ||h||^4."""
    h = np.asarray(h, dtype=float)
    nsq = float(np.dot(h, h))
    return 0.25 * nsq * nsq


def d4_grad(h):
    """Gradient ||h||^2 h of the quartic regularizer."""
    h = np.asarray(h, dtype=float)
    return float(np.dot(h, h)) * h


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(eq=False)
class ModelAnchor:
    """Frozen oracle data of f at one anchor point, plus the level M.

    All cached quantities (value, gradient, Hessian, trace, spectral
    factorization) belong to the same x.  ``with_m`` re-levels the anchor
    without touching the cached data, so level escalations at a fixed anchor
    cost no oracle calls.
    """

    x: np.ndarray
    f_x: float
    g_x: np.ndarray
    H_x: np.ndarray
    trace_H: float
    M: float
    eigvals: np.ndarray
    eigvecs: np.ndarray
    _third_memo: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_oracle(cls, oracle, x, M, f_x=None, g_x=None):
        """Evaluate and freeze the anchor data of ``oracle`` at ``x``.

        ``f_x`` / ``g_x`` may be passed in when the caller already evaluated
        them at x (they are then not re-queried and not re-counted).
        """
        if M <= 0.0:
            raise ValueError("regularization level M must be positive")
        x = np.asarray(x, dtype=float)
        if f_x is None:
            f_x = oracle.value(x)
        if g_x is None:
            g_x = oracle.grad(x)
        H = oracle.hessian(x)
        trace_h = oracle.hessian_trace(x)
        w, q = np.linalg.eigh(H)
        if w.min() < -EIG_FLOOR:
            raise ConvexityError(
                "anchor Hessian has eigenvalue %.3e < -%.0e" % (w.min(), EIG_FLOOR)
            )
        w = np.maximum(w, 0.0)
        return cls(
            x=_frozen(x),
            f_x=float(f_x),
            g_x=_frozen(g_x),
            H_x=_frozen(H),
            trace_H=float(trace_h),
            M=float(M),
            eigvals=_frozen(w),
            eigvecs=_frozen(q),
        )

    def with_m(self, M):
        """Same anchor data at a different level M (no oracle calls)."""
        if M <= 0.0:
            raise ValueError("regularization level M must be positive")
        return replace(self, M=float(M))

    def third_at(self, oracle, h):
        """Memoized D3f(x)[h]^2 at this anchor.

        The zero displacement is exact without an oracle call; otherwise
        results are keyed by the bit pattern of h (the inner solver re-queries
        the same trial displacement when it becomes the next iterate).
        """
        h = np.ascontiguousarray(h, dtype=float)
        if not h.any():
            return np.zeros_like(self.x)
        key = h.tobytes()
        memo = self._third_memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        t = oracle.third_directional(self.x, h)
        if len(memo) >= _MEMO_CAP:
            memo.pop(next(iter(memo)))
        memo[key] = t
        return t


def taylor3_value(anchor, oracle, y):
    """Third-order Taylor polynomial Phi(y) of f around the anchor."""
    h = np.asarray(y, dtype=float) - anchor.x
    t = anchor.third_at(oracle, h)
    return (
        anchor.f_x
        + float(np.dot(anchor.g_x, h))
        + 0.5 * float(h @ anchor.H_x @ h)
        + float(np.dot(t, h)) / 6.0
    )


def omega_value(anchor, oracle, y):
    """Regularized model Omega(y) = Phi(y) + (M / 2) d4(y - x)."""
    h = np.asarray(y, dtype=float) - anchor.x
    return taylor3_value(anchor, oracle, y) + 0.5 * anchor.M * d4_value(h)


def omega_grad(anchor, oracle, y):
    """Gradient of the regularized model,

        grad Omega(y) = g + H h + 1/2 D3f(x)[h]^2 + (M / 2) ||h||^2 h.

    The 1/2 on the directional third derivative is what calculus gives for
    the 1/6 <T(h), h> term of Phi; a finite-difference consistency test pins
    it down.
    """
    h = np.asarray(y, dtype=float) - anchor.x
    t = anchor.third_at(oracle, h)
    return anchor.g_x + anchor.H_x @ h + 0.5 * t + 0.5 * anchor.M * d4_grad(h)


def rho_value(anchor, y):
    """Scaling function rho(y) = 1/2 <H h, h> + (M / 2) d4(h)."""
    h = np.asarray(y, dtype=float) - anchor.x
    return 0.5 * float(h @ anchor.H_x @ h) + 0.5 * anchor.M * d4_value(h)


def rho_grad(anchor, y):
    """Gradient H h + (M / 2) ||h||^2 h of the scaling function."""
    h = np.asarray(y, dtype=float) - anchor.x
    return anchor.H_x @ h + 0.5 * anchor.M * d4_grad(h)


def bregman_div(anchor, u, v):
    """Bregman divergence of the scaling function,

        beta(u, v) = rho(v) - rho(u) - <grad rho(u), v - u>  >=  0.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return rho_value(anchor, v) - rho_value(anchor, u) - float(
        np.dot(rho_grad(anchor, u), v - u)
    )


def inner_constants(anchor, grad_tilde_norm):
    """Smoothness and divergence constants used by the inner solver.

    With g = ||grad of the composite objective at the anchor|| and
    B = (96 g / M)^(2/3):

        L    = trace(H) + (3 M / 2) B
        beta = 1/2 trace(H) B + (M / 8) B^2

    L bounds the model's curvature relative to the scaling function on the
    relevant sublevel set; beta bounds the initial Bregman divergence to the
    model minimizer.  Both are what the slow-convergence certificate compares
    against.
    """
    g = float(grad_tilde_norm)
    if g < 0.0:
        raise ValueError("gradient norm must be nonnegative")
    bracket = (96.0 * g / anchor.M) ** (2.0 / 3.0)
    lips = anchor.trace_H + 1.5 * anchor.M * bracket
    beta = 0.5 * anchor.trace_H * bracket + anchor.M / 8.0 * bracket**2
    return lips, beta
