"""
Auditing oracle derivatives
===========================

Every solver in this package trusts its oracle for values, gradients,
Hessians, and third-order directional curvature.  This script audits those
derivatives with central finite differences on the two bundled problems,
then shows how the finite-difference fallback behaves when an analytic
third derivative is not available.
"""

import numpy as np

from tensormin.harness import bundled_dataset_path, load_dataset
from tensormin.oracles import (
    FdThirdOracle,
    check_derivatives,
    fd_third_directional,
    logistic_oracle,
    quartic_oracle,
)

print("Derivative audit")
print("=" * 40)

# ---------------------------------------------------------------------------
# Logistic regression on the bundled dataset
# ---------------------------------------------------------------------------
dataset = load_dataset(bundled_dataset_path())
oracle = logistic_oracle(dataset)
print(f"\nlogistic problem: {dataset.n_samples} samples, dim {dataset.dim}")

rng = np.random.default_rng(0)
x = rng.standard_normal(dataset.dim)
report = check_derivatives(oracle, x, tol=1e-5)
for order in sorted(report.max_rel_err):
    print(f"  order {order}: max relative error {report.max_rel_err[order]:.3e}")
print(f"  passed: {report.passed}")

# ---------------------------------------------------------------------------
# Separable quartic
# ---------------------------------------------------------------------------
quartic = quartic_oracle(5)
x = rng.standard_normal(5)
report = check_derivatives(quartic, x, tol=1e-5)
print("\nquartic problem: dim 5")
for order in sorted(report.max_rel_err):
    print(f"  order {order}: max relative error {report.max_rel_err[order]:.3e}")
print(f"  passed: {report.passed}")

# ---------------------------------------------------------------------------
# Finite-difference replacement for the third derivative
# ---------------------------------------------------------------------------
# The second difference of the gradient along h approximates the third-order
# directional term with an error bounded by (L3 / 3) * tau * ||h||^3, where
# L3 is the Lipschitz constant of the Hessian.
print("\nfinite-difference third-order term (logistic, random direction):")
x = rng.standard_normal(dataset.dim)
h = rng.standard_normal(dataset.dim)
exact = oracle.third_directional(x, h)
print(f"  {'tau':>8}  {'error':>12}")
for tau in (1e-1, 1e-2, 1e-3, 1e-4):
    approx = fd_third_directional(oracle, x, h, tau)
    err = np.linalg.norm(approx - exact)
    print(f"  {tau:8.0e}  {err:12.3e}")

# The wrapper makes any oracle usable by the solvers even when only values,
# gradients and Hessians are analytic.
wrapped = FdThirdOracle(logistic_oracle(dataset), 1e-4)
approx = wrapped.third_directional(x, h)
print(f"\nFdThirdOracle(tau=1e-4) error: {np.linalg.norm(approx - exact):.3e}")
print(f"wrapped oracle counters: {wrapped.calls.snapshot()}")
