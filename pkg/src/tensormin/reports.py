"""Run-level reports shared by the outer solvers and the experiment harness."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class RunReport:
    """Counters and final state of one solver run at one target accuracy.

    ``IT`` counts assignments of a new outer iterate (including the final
    one made when the gradient target is reached); ``CO`` counts every oracle
    entry-point invocation; ``BGM_E`` / ``BGM_IT`` count inner-solver
    executions and their total iterations, with ``BGM_A = BGM_IT / BGM_E``.
    ``converged`` is False when an iteration cap ended the run instead of the
    gradient test.
    """

    epsilon: float
    IT: int
    CO: int
    BGM_E: int
    BGM_IT: int
    BGM_A: float
    final_grad_norm: float
    final_f: float
    wall_time_s: float
    converged: bool = True
