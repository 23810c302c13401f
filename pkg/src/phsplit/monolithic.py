"""Monolithic (all-at-once) reference solution of the coupled problem.

The closed loop eliminates the internal port through the coupling relation:
at each midpoint the pair of conditions

    (x_{j+1} - x_j)/tau = A x_{j+1/2} + B_ext ue_{j+1/2} + B_int u_{j+1/2}
    C_int x_{j+1/2} + D_21 ue_{j+1/2} + (D_22 - N_c) u_{j+1/2} = 0

is one square linear system in (x_{j+1}, u_{j+1/2}).  This is exactly the
same midpoint discretization used by the splitting operators, so the
monolithic solution is a true fixed point of the iteration (not merely an
approximation of it).
"""

from __future__ import annotations

import numpy as np

from .errors import SingularClosedLoop
from .operators import CoupledProblem, _factorize, _march
from .trajectory import MIDPOINT, NODE, GridTrajectory, TrajPair

__all__ = ["solve_monolithic"]


def solve_monolithic(problem: CoupledProblem) -> TrajPair:
    """Solve the interconnected system directly by time marching.

    Returns the node-sampled state (row 0 equals x0) and the
    midpoint-sampled internal port signal.  The time-invariant step matrix
    is factorized once.

    Raises
    ------
    SingularClosedLoop
        If the closed-loop step matrix is singular.
    """
    node, g = problem.node, problem.grid
    key = ("monolithic",)
    if key not in problem._cache:
        n, mi = node.n, node.m_int
        tau = g.tau
        K = np.zeros((n + mi, n + mi))
        K[:n, :n] = np.eye(n) / tau - 0.5 * node.A
        K[:n, n:] = -node.B_int
        K[n:, :n] = 0.5 * node.C_int
        K[n:, n:] = node.D22 - problem.coupling.N_c
        Ex = np.zeros((n + mi, n))
        Ex[:n, :n] = np.eye(n) / tau + 0.5 * node.A
        Ex[n:, :n] = -0.5 * node.C_int
        problem._cache[key] = (_factorize(K, SingularClosedLoop), Ex)
    factors, Ex = problem._cache[key]
    ue = problem.u_ext.values
    data = np.hstack([ue @ node.B_ext.T, -(ue @ node.D21.T)])
    x, u = _march(factors, Ex, data, problem.x0, node.n)
    return TrajPair(GridTrajectory(g, NODE, x), GridTrajectory(g, MIDPOINT, u))
