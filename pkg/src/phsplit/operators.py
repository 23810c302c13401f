"""Discrete splitting operators on trajectory space.

Time discretization is the implicit midpoint rule: states are node samples,
ports and operator residuals are midpoint samples.  The dynamics operator

    M_h(x, u) = ( x' - A x - B_ext ue - B_int u ,  C_int x + D_21 ue + D_22 u )

acts on state/port pairs and returns a midpoint-sampled image whose first
block is the *state-space* residual (no energy weight applied; the weight
enters through the inner product).  The affine data (initial state x0 and
the external drive ue) are baked into M_h: the trajectory's row 0 is always
replaced by x0, which is the discrete version of the domain condition
x(0) = x0.

The coupling operator N(x, u) = (0, -N_c u) acts pointwise in time; its
resolvent and Cayley transform reduce to constant port-space matrices.

The key structural fact (discrete telescoping): for pairs sharing x0,

    <p1 - p2, M_h p1 - M_h p2>_h  >=  ||x1_N - x2_N||_H^2 / 2  >=  0

with equality in the second inequality exactly for lossless nodes, because
the midpoint average makes the telescoping sum collapse without quadrature
error.  The inner product weighs the state block with H and ports with the
identity.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    GridMismatch,
    NotDissipative,
    SamplingMismatch,
    SingularCoupling,
    SingularStep,
)
from .node import CouplingOperator, SystemNode, check_dissipativity
from .trajectory import (
    MIDPOINT,
    NODE,
    GridTrajectory,
    TimeGrid,
    TrajPair,
    lincomb,
    to_midpoints,
)

__all__ = [
    "CoupledProblem",
    "OperatorImage",
    "EnergyBalanceReport",
    "apply_M",
    "apply_I_plus_lambda_M",
    "reflect",
    "resolve_M",
    "apply_resolvent_N",
    "cayley_N",
    "check_discrete_monotonicity",
    "monotonicity_slack",
    "MonotonicityReport",
    "discrete_energy_balance",
    "simulate_midpoint",
    "pair_norm",
    "image_norm",
    "pair_diff",
    "image_diff",
]


@dataclass(frozen=True, eq=False)
class OperatorImage:
    """Midpoint-sampled image (w, z) of the dynamics operator."""

    w: GridTrajectory
    z: GridTrajectory

    def __post_init__(self):
        if self.w.grid != self.z.grid:
            raise GridMismatch("image blocks live on different grids")
        if self.w.sampling != MIDPOINT or self.z.sampling != MIDPOINT:
            raise SamplingMismatch("image blocks must be midpoint-sampled")

    @property
    def grid(self) -> TimeGrid:
        return self.w.grid


@dataclass(frozen=True, eq=False)
class CoupledProblem:
    """A dissipative node, a monotone coupling, the grid, and the data.

    Construction enforces the two certificates: the node must pass
    :func:`~phsplit.node.check_dissipativity` and the coupling is validated
    by :class:`~phsplit.node.CouplingOperator` itself.  ``validate=False``
    skips the node certificate (used only to build deliberately broken
    problems in tests).  Instances are immutable; per-lambda factorizations
    are cached internally (idempotent fills), so a problem can be shared
    across runs.
    """

    node: SystemNode
    coupling: CouplingOperator
    grid: TimeGrid
    x0: np.ndarray = field(repr=False)
    u_ext: GridTrajectory = field(repr=False)
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        if validate:
            report = check_dissipativity(self.node)
            if not report.is_dissipative:
                raise NotDissipative(
                    f"node fails the passivity certificate (max_sym_eig="
                    f"{report.max_sym_eig:.3e})"
                )
        if self.coupling.m != self.node.m_int:
            raise DimensionMismatch(
                f"coupling size {self.coupling.m} != internal port count {self.node.m_int}"
            )
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.shape != (self.node.n,):
            raise DimensionMismatch(f"x0 must have length {self.node.n}, got {x0.shape}")
        object.__setattr__(self, "x0", x0)
        if self.u_ext.grid != self.grid:
            raise GridMismatch("external input lives on a different grid")
        if self.u_ext.sampling != MIDPOINT:
            raise SamplingMismatch("external input must be midpoint-sampled")
        if self.u_ext.dim != self.node.m_ext:
            raise DimensionMismatch(
                f"external input dim {self.u_ext.dim} != m_ext {self.node.m_ext}"
            )
        object.__setattr__(self, "_cache", {})

    # -- factorization caches ------------------------------------------------

    def _resolve_factors(self, lam: float):
        key = ("resolve", float(lam))
        if key not in self._cache:
            node, tau = self.node, self.grid.tau
            n, mi = node.n, node.m_int
            K = np.zeros((n + mi, n + mi))
            K[:n, :n] = (0.5 + lam / tau) * np.eye(n) - 0.5 * lam * node.A
            K[:n, n:] = -lam * node.B_int
            K[n:, :n] = 0.5 * lam * node.C_int
            K[n:, n:] = np.eye(mi) + lam * node.D22
            Ex = np.zeros((n + mi, n))
            Ex[:n, :n] = (lam / tau - 0.5) * np.eye(n) + 0.5 * lam * node.A
            Ex[n:, :n] = -0.5 * lam * node.C_int
            self._cache[key] = (_factorize(K, SingularStep), Ex)
        return self._cache[key]

    def _coupling_maps(self, lam: float):
        key = ("coupling", float(lam))
        if key not in self._cache:
            Nc = self.coupling.N_c
            eye = np.eye(self.coupling.m)
            M = eye - lam * Nc
            try:
                res = np.linalg.solve(M, eye)
            except np.linalg.LinAlgError as exc:
                raise SingularCoupling(f"I - lambda*N_c singular at lambda={lam}") from exc
            if not np.all(np.isfinite(res)):
                raise SingularCoupling(f"I - lambda*N_c numerically singular at lambda={lam}")
            cay = 2.0 * res - eye  # equals (I + lam N_c)(I - lam N_c)^{-1}
            self._cache[key] = (res, cay)
        return self._cache[key]


def _factorize(K: np.ndarray, err_cls):
    """LU-factorize a step matrix, raising ``err_cls`` when singular."""
    if K.shape[0] == 0:
        return None
    lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    diag = np.abs(np.diag(lu))
    scale = max(float(np.max(diag, initial=0.0)), float(np.linalg.norm(K, np.inf)))
    if not np.all(np.isfinite(lu)) or float(np.min(diag)) <= 1e-14 * max(scale, 1e-300):
        raise err_cls(0, "time-invariant step matrix is singular")
    return lu, piv


def _march(factors, Ex: np.ndarray, data: np.ndarray, x0: np.ndarray, n: int):
    """Run the one-step recursion K s_j = Ex x_j + data_j for all steps.

    Returns the node-sampled states (N_t + 1, n) and the per-step tail
    unknowns (N_t, K.shape[0] - n).
    """
    N_t = data.shape[0]
    if factors is None:
        return np.zeros((N_t + 1, 0)), np.zeros((N_t, 0))
    rhs_data = scipy.linalg.lu_solve(factors, data.T, check_finite=False).T
    M1 = scipy.linalg.lu_solve(factors, Ex, check_finite=False)
    x = np.empty((N_t + 1, n))
    tail = np.empty((N_t, Ex.shape[0] - n))
    x[0] = x0
    for j in range(N_t):
        s = M1 @ x[j] + rhs_data[j]
        x[j + 1] = s[:n]
        tail[j] = s[n:]
    return x, tail


def _midpoints_with_x0(problem: CoupledProblem, x: GridTrajectory):
    """Midpoint states and divided differences with row 0 pinned to x0."""
    vals = x.values
    if vals.shape[1] != problem.node.n:
        raise DimensionMismatch(f"state dim {vals.shape[1]} != n {problem.node.n}")
    first = problem.x0
    tau = problem.grid.tau
    x_mid = 0.5 * (vals[:-1] + vals[1:])
    dx = (vals[1:] - vals[:-1]) / tau
    if vals.shape[0]:
        x_mid[0] = 0.5 * (first + vals[1])
        dx[0] = (vals[1] - first) / tau
    return x_mid, dx


def _check_pair(problem: CoupledProblem, p: TrajPair) -> None:
    if p.grid != problem.grid:
        raise GridMismatch("pair lives on a different grid")
    if p.x.dim != problem.node.n or p.u.dim != problem.node.m_int:
        raise DimensionMismatch(
            f"pair dims ({p.x.dim}, {p.u.dim}) != problem dims "
            f"({problem.node.n}, {problem.node.m_int})"
        )


def _check_image(problem: CoupledProblem, q: OperatorImage) -> None:
    if q.grid != problem.grid:
        raise GridMismatch("image lives on a different grid")
    if q.w.dim != problem.node.n or q.z.dim != problem.node.m_int:
        raise DimensionMismatch(
            f"image dims ({q.w.dim}, {q.z.dim}) != problem dims "
            f"({problem.node.n}, {problem.node.m_int})"
        )


def apply_M(problem: CoupledProblem, p: TrajPair) -> OperatorImage:
    """Discrete dynamics operator at the pair ``p``.

    w_{j+1/2} = (x_{j+1} - x_j)/tau - (A x_{j+1/2} + B_ext ue_{j+1/2} + B_int u_{j+1/2})
    z_{j+1/2} = C_int x_{j+1/2} + D_21 ue_{j+1/2} + D_22 u_{j+1/2}

    with the trajectory's row 0 replaced by the problem's x0.
    """
    _check_pair(problem, p)
    node = problem.node
    x_mid, dx = _midpoints_with_x0(problem, p.x)
    ue = problem.u_ext.values
    u = p.u.values
    w = dx - x_mid @ node.A.T - ue @ node.B_ext.T - u @ node.B_int.T
    z = x_mid @ node.C_int.T + ue @ node.D21.T + u @ node.D22.T
    g = problem.grid
    return OperatorImage(GridTrajectory(g, MIDPOINT, w), GridTrajectory(g, MIDPOINT, z))


def apply_I_plus_lambda_M(problem: CoupledProblem, lam: float, p: TrajPair) -> OperatorImage:
    """(I + lambda*M_h) p, the shadow of a pair; identity acts on midpoints."""
    img = apply_M(problem, p)
    x_mid, _ = _midpoints_with_x0(problem, p.x)
    g = problem.grid
    return OperatorImage(
        GridTrajectory(g, MIDPOINT, x_mid + lam * img.w.values),
        GridTrajectory(g, MIDPOINT, p.u.values + lam * img.z.values),
    )


def reflect(problem: CoupledProblem, p: TrajPair, q: OperatorImage) -> OperatorImage:
    """2*p - q in image space (the pair enters through its midpoint samples)."""
    _check_pair(problem, p)
    _check_image(problem, q)
    x_mid, _ = _midpoints_with_x0(problem, p.x)
    g = problem.grid
    return OperatorImage(
        GridTrajectory(g, MIDPOINT, 2.0 * x_mid - q.w.values),
        GridTrajectory(g, MIDPOINT, 2.0 * p.u.values - q.z.values),
    )


def resolve_M(problem: CoupledProblem, lam: float, rhs: OperatorImage) -> TrajPair:
    """Solve (I + lambda*M_h)(x, u) = rhs by marching in time.

    The per-step linear system couples (x_{j+1}, u_{j+1/2}); its matrix is
    time-invariant, so it is LU-factorized once per lambda and reused across
    all steps and iterations.  The returned state has row 0 equal to x0.

    Raises
    ------
    SingularStep
        If the step matrix is singular (cannot happen for a certified
        dissipative node with lambda > 0, but checked defensively).
    """
    _check_image(problem, rhs)
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    node, g = problem.node, problem.grid
    factors, Ex = problem._resolve_factors(lam)
    ue = problem.u_ext.values
    data = np.hstack(
        [
            rhs.w.values + lam * (ue @ node.B_ext.T),
            rhs.z.values - lam * (ue @ node.D21.T),
        ]
    )
    x, u = _march(factors, Ex, data, problem.x0, node.n)
    return TrajPair(GridTrajectory(g, NODE, x), GridTrajectory(g, MIDPOINT, u))


def apply_resolvent_N(problem: CoupledProblem, lam: float, q: OperatorImage) -> OperatorImage:
    """(I + lambda*N)^{-1} q = (w, (I - lambda*N_c)^{-1} z), pointwise in time."""
    _check_image(problem, q)
    res, _ = problem._coupling_maps(lam)
    z = q.z.values @ res.T
    return OperatorImage(q.w, GridTrajectory(problem.grid, MIDPOINT, z))


def cayley_N(problem: CoupledProblem, lam: float, q: OperatorImage) -> OperatorImage:
    """(I - lambda*N)(I + lambda*N)^{-1} q; the z block is multiplied by
    (I + lambda*N_c)(I - lambda*N_c)^{-1}, an isometry for skew N_c."""
    _check_image(problem, q)
    _, cay = problem._coupling_maps(lam)
    z = q.z.values @ cay.T
    return OperatorImage(q.w, GridTrajectory(problem.grid, MIDPOINT, z))


# -- inner products and norms ------------------------------------------------


def _weights(grid: TimeGrid, omega: float) -> np.ndarray:
    if omega == 0.0:
        return np.ones(grid.N_t)
    return np.exp(-2.0 * omega * grid.midpoint_times)


def image_norm(problem: CoupledProblem, q: OperatorImage, omega: float = 0.0) -> float:
    """L2(0,T) norm of an image: H weighs the w block, identity the z block."""
    _check_image(problem, q)
    H = problem.node.H
    rho = _weights(problem.grid, omega)
    quad = np.sum(q.w.values * (q.w.values @ H.T), axis=1) + np.sum(q.z.values**2, axis=1)
    return float(np.sqrt(max(problem.grid.tau * float(np.dot(rho, quad)), 0.0)))


def pair_norm(problem: CoupledProblem, p: TrajPair, omega: float = 0.0) -> float:
    """L2(0,T) norm of a pair via its midpoint samples (H on x, identity on u)."""
    _check_pair(problem, p)
    H = problem.node.H
    x_mid = to_midpoints(p.x)
    rho = _weights(problem.grid, omega)
    quad = np.sum(x_mid * (x_mid @ H.T), axis=1) + np.sum(p.u.values**2, axis=1)
    return float(np.sqrt(max(problem.grid.tau * float(np.dot(rho, quad)), 0.0)))


def pair_diff(a: TrajPair, b: TrajPair) -> TrajPair:
    return TrajPair(lincomb(1.0, a.x, -1.0, b.x), lincomb(1.0, a.u, -1.0, b.u))


def image_diff(a: OperatorImage, b: OperatorImage) -> OperatorImage:
    return OperatorImage(lincomb(1.0, a.w, -1.0, b.w), lincomb(1.0, a.z, -1.0, b.z))


# -- structural checks ---------------------------------------------------------


def monotonicity_slack(problem: CoupledProblem, p1: TrajPair, p2: TrajPair) -> float:
    """Slack of the discrete monotonicity estimate for one pair difference.

    Returns ``<dp, M_h p1 - M_h p2>_h - ||dx_N||_H^2 / 2`` which is
    nonnegative (up to roundoff) for every certified problem; the telescoping
    sum is exact for the midpoint scheme.  Row 0 of the state difference is
    zero by the shared x0 substitution.
    """
    _check_pair(problem, p1)
    _check_pair(problem, p2)
    node, g = problem.node, problem.grid
    q1, q2 = apply_M(problem, p1), apply_M(problem, p2)
    dw = q1.w.values - q2.w.values
    dz = q1.z.values - q2.z.values
    dx = p1.x.values - p2.x.values
    dx[0] = 0.0  # both rows are replaced by the same x0
    dx_mid = 0.5 * (dx[:-1] + dx[1:])
    du = p1.u.values - p2.u.values
    H = node.H
    inner = g.tau * (float(np.sum(dx_mid * (dw @ H.T))) + float(np.sum(du * dz)))
    terminal = 0.5 * float(dx[-1] @ H @ dx[-1])
    return inner - terminal


@dataclass(frozen=True)
class MonotonicityReport:
    """Sampled verdict on discrete monotonicity of the dynamics operator."""

    min_slack: float
    n_samples: int
    passed: bool


def check_discrete_monotonicity(
    problem: CoupledProblem,
    n_samples: int = 100,
    seed: int = 0,
    tol: float = 1e-12,
) -> MonotonicityReport:
    """Sample random trajectory pairs and collect the worst monotonicity slack.

    Passes iff ``min_slack >= -tol * (1 + magnitude)`` over all samples,
    where the magnitude is the product of the two pair norms.
    """
    rng = np.random.default_rng(seed)
    g, n, m = problem.grid, problem.node.n, problem.node.m_int
    worst = np.inf
    passed = True
    for _ in range(n_samples):
        pairs = []
        for _ in range(2):
            x = GridTrajectory(g, NODE, rng.standard_normal((g.N_t + 1, n)))
            u = GridTrajectory(g, MIDPOINT, rng.standard_normal((g.N_t, m)))
            pairs.append(TrajPair(x, u))
        slack = monotonicity_slack(problem, pairs[0], pairs[1])
        scale = pair_norm(problem, pair_diff(pairs[0], pairs[1])) ** 2
        rel = slack / (1.0 + scale)
        worst = min(worst, rel)
        if rel < -tol:
            passed = False
    return MonotonicityReport(min_slack=worst, n_samples=n_samples, passed=passed)


@dataclass(frozen=True)
class EnergyBalanceReport:
    """Per-node trace of the discrete dissipation inequality."""

    residuals: np.ndarray = field(repr=False)
    max_violation: float
    passed: bool


def discrete_energy_balance(
    node: SystemNode,
    grid: TimeGrid,
    x: GridTrajectory,
    ports: GridTrajectory,
    tol_rel: float = 1e-10,
) -> EnergyBalanceReport:
    """Check ||x_j||_H^2 <= ||x_0||_H^2 + 2 sum_i tau <ports, outputs> for all j.

    ``ports`` stacks the external and internal inputs (midpoint-sampled,
    dimension m_ext + m_int); outputs are evaluated from the node relations
    at the state midpoints.  ``residuals[j]`` is stored - budget at node j,
    so positive values are violations.  For a midpoint trajectory of a
    lossless closed node the residuals vanish identically.
    """
    if x.sampling != NODE:
        raise SamplingMismatch("state must be node-sampled")
    if ports.sampling != MIDPOINT:
        raise SamplingMismatch("ports must be midpoint-sampled")
    if x.grid != grid or ports.grid != grid:
        raise GridMismatch("trajectories live on a different grid")
    me = node.m_ext
    if ports.dim != me + node.m_int:
        raise DimensionMismatch(
            f"ports dim {ports.dim} != m_ext + m_int = {me + node.m_int}"
        )
    H = node.H
    x_mid = to_midpoints(x)
    ue, ui = ports.values[:, :me], ports.values[:, me:]
    ye, yi = node.outputs(x_mid, ue, ui)
    supplied = 2.0 * grid.tau * (np.sum(ue * ye, axis=1) + np.sum(ui * yi, axis=1))
    energy = np.sum(x.values * (x.values @ H.T), axis=1)
    budget = energy[0] + np.concatenate(([0.0], np.cumsum(supplied)))
    residuals = energy - budget
    max_violation = float(np.max(residuals))
    passed = max_violation <= tol_rel * (1.0 + energy[0])
    return EnergyBalanceReport(residuals=residuals, max_violation=max_violation, passed=passed)


def simulate_midpoint(
    node: SystemNode,
    grid: TimeGrid,
    x0: np.ndarray,
    u_ext: GridTrajectory | None = None,
    u_int: GridTrajectory | None = None,
) -> GridTrajectory:
    """Implicit-midpoint simulation of one node with prescribed port inputs.

    Solves (x_{j+1} - x_j)/tau = A x_{j+1/2} + B_ext ue_{j+1/2} + B_int ui_{j+1/2}
    with a single LU factorization of the time-invariant step matrix.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (node.n,):
        raise DimensionMismatch(f"x0 must have length {node.n}, got {x0.shape}")
    ue = u_ext.values if u_ext is not None else np.zeros((grid.N_t, node.m_ext))
    ui = u_int.values if u_int is not None else np.zeros((grid.N_t, node.m_int))
    if ue.shape != (grid.N_t, node.m_ext) or ui.shape != (grid.N_t, node.m_int):
        raise DimensionMismatch("port inputs have wrong shape for the grid/node")
    tau = grid.tau
    K = np.eye(node.n) / tau - 0.5 * node.A
    Ex = np.eye(node.n) / tau + 0.5 * node.A
    data = ue @ node.B_ext.T + ui @ node.B_int.T
    factors = _factorize(K, SingularStep) if node.n else None
    x, _ = _march(factors, Ex, data, x0, node.n)
    return GridTrajectory(grid, NODE, x)
