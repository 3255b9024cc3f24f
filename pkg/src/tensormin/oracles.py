"""Problem oracles: smooth convex objectives with derivatives up to third order.

A smooth oracle exposes five entry points -- function value, gradient, Hessian,
directional third derivative ``D3f(x)[h]^2`` (a vector; the full third-derivative
tensor is never materialized), and Hessian trace.  Every entry-point invocation
is counted, so solver-level oracle-call statistics can be read off the oracle
afterwards.  Composite terms ``psi`` are kept separate from the smooth part;
only the zero term ships here.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


class CallCounter:
    """Thread-safe per-entry-point call counts for a smooth oracle.

    A single oracle may be shared by independent solver runs executing
    concurrently, so increments are guarded by a lock.
    """

    _FIELDS = ("value", "grad", "hessian", "third", "trace")

    def __init__(self):
        self._lock = threading.Lock()
        self.value = 0
        self.grad = 0
        self.hessian = 0
        self.third = 0
        self.trace = 0

    def bump(self, name):
        with self._lock:
            setattr(self, name, getattr(self, name) + 1)

    def total(self):
        """Total number of entry-point invocations across all five kinds."""
        with self._lock:
            return self.value + self.grad + self.hessian + self.third + self.trace

    def snapshot(self):
        """Dict copy of the five counters, taken atomically."""
        with self._lock:
            return {name: getattr(self, name) for name in self._FIELDS}

    def reset(self):
        with self._lock:
            for name in self._FIELDS:
                setattr(self, name, 0)

    def __repr__(self):
        return "CallCounter(%s)" % ", ".join(
            "%s=%d" % (k, v) for k, v in self.snapshot().items()
        )


class SmoothOracle(ABC):
    """Smooth convex objective queried through counted entry points.

    Subclasses implement the underscore hooks; the public methods validate
    dimensions and maintain ``self.calls``.  ``lipschitz_third`` optionally
    reports a Lipschitz constant of the third derivative when one is known
    in closed form, else ``None``.

    Attributes
    ----------
    n : int
        Dimension of the variable.
    calls : CallCounter
        Per-entry-point invocation counts.
    lipschitz_third : float or None
        Known Lipschitz constant of the third derivative, if any.
    """

    def __init__(self, n):
        self.n = int(n)
        if self.n <= 0:
            raise ValueError("oracle dimension must be positive, got %d" % n)
        self.calls = CallCounter()
        self.lipschitz_third = None

    def _as_vector(self, x, name="x"):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(
                "%s has shape %s, expected (%d,)" % (name, x.shape, self.n)
            )
        return x

    # -- counted entry points -------------------------------------------------

    def value(self, x):
        """Objective value f(x)."""
        x = self._as_vector(x)
        self.calls.bump("value")
        return float(self._value(x))

    def grad(self, x):
        """Gradient of f at x."""
        x = self._as_vector(x)
        self.calls.bump("grad")
        return self._grad(x)

    def hessian(self, x):
        """Hessian of f at x as a symmetric (n, n) array."""
        x = self._as_vector(x)
        self.calls.bump("hessian")
        return self._hessian(x)

    def third_directional(self, x, h):
        """The vector D3f(x)[h]^2: third derivative applied to (h, h).

        Only this directional form is ever exposed; no n**3 tensor is built.
        """
        x = self._as_vector(x)
        h = self._as_vector(h, name="h")
        self.calls.bump("third")
        return self._third_directional(x, h)

    def hessian_trace(self, x):
        """trace of the Hessian at x, without materializing the matrix."""
        x = self._as_vector(x)
        self.calls.bump("trace")
        return float(self._hessian_trace(x))

    # -- hooks ----------------------------------------------------------------

    @abstractmethod
    def _value(self, x): ...

    @abstractmethod
    def _grad(self, x): ...

    @abstractmethod
    def _hessian(self, x): ...

    @abstractmethod
    def _third_directional(self, x, h): ...

    @abstractmethod
    def _hessian_trace(self, x): ...


# -- composite terms ----------------------------------------------------------


class CompositeTerm(ABC):
    """Simple convex term psi added to the smooth objective.

    ``kind`` tags the term so solvers can dispatch on the cases they support.
    """

    kind = "abstract"

    @abstractmethod
    def value(self, x): ...

    @abstractmethod
    def in_domain(self, x): ...


class ZeroComposite(CompositeTerm):
    """psi identically zero on all of R^n (the shipped composite term)."""

    kind = "zero"

    def value(self, x):
        return 0.0

    def in_domain(self, x):
        return True


# -- datasets -----------------------------------------------------------------


@dataclass
class Dataset:
    """Binary-classification data for the logistic objective.

    ``features`` is (m, n+1) with an all-ones intercept column first;
    ``labels`` is (m,) with entries in {0, 1}.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        m = self.features.shape[0]
        if self.labels.shape != (m,):
            raise ValueError(
                "labels shape %s does not match %d rows" % (self.labels.shape, m)
            )
        if m == 0:
            raise ValueError("dataset is empty")
        if not np.all(self.features[:, 0] == 1.0):
            raise ValueError("first feature column must be the all-ones intercept")
        if not np.all((self.labels == 0.0) | (self.labels == 1.0)):
            raise ValueError("labels must be 0 or 1")

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


class LogisticOracle(SmoothOracle):
    """Logistic-regression loss over a fixed dataset.

    With rows a_i and labels b_i in {0, 1}, and s_i = sigmoid(<a_i, x>):

        f(x)         = sum_i [ log(1 + exp(<a_i, x>)) - b_i <a_i, x> ]
        grad f(x)    = A^T (s - b)
        hess f(x)    = A^T diag(s * (1 - s)) A
        D3f(x)[h]^2  = A^T [ s * (1 - s) * (1 - 2 s) * (A h)^2 ]

    The value is computed in the log-sum-exp form above, which equals the
    negative log-likelihood and is stable for large |<a_i, x>|.
    """

    def __init__(self, dataset):
        if not isinstance(dataset, Dataset):
            dataset = Dataset(*dataset)
        super().__init__(dataset.dim)
        self.dataset = dataset
        self._row_sq = np.einsum("ij,ij->i", dataset.features, dataset.features)

    def _margins(self, x):
        return self.dataset.features @ x

    def _value(self, x):
        z = self._margins(x)
        return float(np.sum(np.logaddexp(0.0, z) - self.dataset.labels * z))

    def _grad(self, x):
        s = expit(self._margins(x))
        return self.dataset.features.T @ (s - self.dataset.labels)

    def _hessian(self, x):
        s = expit(self._margins(x))
        w = s * (1.0 - s)
        a = self.dataset.features
        return a.T @ (w[:, None] * a)

    def _third_directional(self, x, h):
        s = expit(self._margins(x))
        w = s * (1.0 - s) * (1.0 - 2.0 * s)
        ah = self.dataset.features @ h
        return self.dataset.features.T @ (w * ah * ah)

    def _hessian_trace(self, x):
        s = expit(self._margins(x))
        return float(np.dot(s * (1.0 - s), self._row_sq))


class QuarticOracle(SmoothOracle):
    """Separable quartic f(x) = sum_i x_i^4.

    The third derivative is 24 x_i on the (i, i, i) diagonal, so it is
    Lipschitz with constant 24 and the global minimizer is the origin.
    """

    def __init__(self, n):
        super().__init__(n)
        self.lipschitz_third = 24.0
        self.minimizer = np.zeros(self.n)

    def _value(self, x):
        return float(np.sum(x**4))

    def _grad(self, x):
        return 4.0 * x**3

    def _hessian(self, x):
        return np.diag(12.0 * x**2)

    def _third_directional(self, x, h):
        return 24.0 * x * h * h

    def _hessian_trace(self, x):
        return float(12.0 * np.sum(x**2))


def logistic_oracle(dataset):
    """Build the logistic-regression oracle for ``dataset``."""
    return LogisticOracle(dataset)


def quartic_oracle(n):
    """Build the separable quartic oracle on R^n."""
    return QuarticOracle(n)


# -- finite-difference third derivative ---------------------------------------


def fd_third_directional(oracle, x, h, tau):
    """Approximate D3f(x)[h]^2 by a second central difference of gradients.

        T_tau(h) = [grad f(x + tau h) + grad f(x - tau h) - 2 grad f(x)] / tau^2

    When the third derivative is Lipschitz with constant L, the error is at
    most (L / 3) * tau * ||h||^3.  Costs three gradient calls.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive, got %r" % (tau,))
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    gp = oracle.grad(x + tau * h)
    gm = oracle.grad(x - tau * h)
    g0 = oracle.grad(x)
    return (gp + gm - 2.0 * g0) / tau**2


class FdThirdOracle:
    """Wrap a smooth oracle, replacing third_directional by its finite-difference
    surrogate T_tau with a fixed step ``tau``.

    Value/gradient/Hessian/trace delegate to the base oracle (and count on its
    counter).  Each third_directional call costs three base gradient calls; the
    gradient at the expansion point is cached, so repeated calls at the same x
    cost two.
    """

    def __init__(self, base, tau):
        if tau <= 0.0:
            raise ValueError("tau must be positive, got %r" % (tau,))
        self.base = base
        self.tau = float(tau)
        self._cached_x = None
        self._cached_g = None

    @property
    def n(self):
        return self.base.n

    @property
    def calls(self):
        return self.base.calls

    @property
    def lipschitz_third(self):
        return self.base.lipschitz_third

    def value(self, x):
        return self.base.value(x)

    def grad(self, x):
        return self.base.grad(x)

    def hessian(self, x):
        return self.base.hessian(x)

    def hessian_trace(self, x):
        return self.base.hessian_trace(x)

    def third_directional(self, x, h):
        x = np.asarray(x, dtype=float)
        h = np.asarray(h, dtype=float)
        tau = self.tau
        gp = self.base.grad(x + tau * h)
        gm = self.base.grad(x - tau * h)
        key = x.tobytes()
        if self._cached_x != key:
            self._cached_g = self.base.grad(x)
            self._cached_x = key
        return (gp + gm - 2.0 * self._cached_g) / tau**2


# -- derivative checks --------------------------------------------------------


@dataclass
class DerivativeReport:
    """Result of a finite-difference audit of an oracle's derivatives.

    ``max_rel_err`` maps derivative order (1, 2, 3) to the worst relative
    error observed over the probe directions; ``failed_orders`` lists the
    orders whose error exceeded ``tol``.
    """

    max_rel_err: dict
    tol: float
    passed: bool
    failed_orders: list = field(default_factory=list)


def check_derivatives(oracle, x, tol=1e-5, n_directions=5, seed=0):
    """Audit grad/hessian/third_directional against central differences of
    the next-lower derivative along random unit directions.

    Parameters
    ----------
    oracle : SmoothOracle
        Oracle under test.
    x : array
        Point at which derivatives are compared.
    tol : float
        Maximum allowed relative error per derivative order.
    n_directions : int
        Number of random probe directions.
    seed : int
        Seed for the probe-direction generator.

    Returns
    -------
    DerivativeReport
    """
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    scale = 1.0 + float(np.linalg.norm(x))
    eps = np.finfo(float).eps
    d1 = scale * eps ** (1.0 / 3.0)  # central value difference: O(d^2) + O(eps/d)
    d3 = scale * eps**0.25           # second gradient difference: O(d^2) + O(eps/d^2)

    g = oracle.grad(x)
    hess = oracle.hessian(x)

    err = {1: 0.0, 2: 0.0, 3: 0.0}
    for _ in range(n_directions):
        h = rng.standard_normal(x.shape[0])
        h /= np.linalg.norm(h)

        fd1 = (oracle.value(x + d1 * h) - oracle.value(x - d1 * h)) / (2.0 * d1)
        ref1 = float(np.dot(g, h))
        err[1] = max(err[1], abs(fd1 - ref1) / (1.0 + abs(ref1)))

        fd2 = (oracle.grad(x + d1 * h) - oracle.grad(x - d1 * h)) / (2.0 * d1)
        ref2 = hess @ h
        err[2] = max(
            err[2],
            float(np.linalg.norm(fd2 - ref2)) / (1.0 + float(np.linalg.norm(ref2))),
        )

        fd3 = fd_third_directional(oracle, x, h, d3)
        ref3 = oracle.third_directional(x, h)
        err[3] = max(
            err[3],
            float(np.linalg.norm(fd3 - ref3)) / (1.0 + float(np.linalg.norm(ref3))),
        )

    failed = [k for k in (1, 2, 3) if err[k] > tol]
    return DerivativeReport(
        max_rel_err=err, tol=tol, passed=not failed, failed_orders=failed
    )
