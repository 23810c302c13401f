"""Alternating resolvent iteration on the coupled trajectory problem.

One sweep of the iteration maps the pair (x_k, u_k) and its shadow
(w_k, z_k) = (I + lam*M_h)(x_k, u_k) to

    (w, z)_{k+1} = (I - lam*N)(I + lam*N)^{-1} (2 (x, u)_k - (w, z)_k)
    (x, u)_{k+1} = (I + lam*M_h)^{-1} (w, z)_{k+1}

The coupling step is pointwise in time (a constant port-space matrix), so
each sweep costs one decoupled time march plus a cheap port map: subsystems
exchange full trajectories, never step-by-step data.

Against a monolithic reference solution, three families of a-posteriori
checks are evaluated and flagged per iteration:

* monotone decrease of the shadow error and its domination of the pair
  error (plain and exponentially weighted norms),
* the weighted L2 and uniform error bounds driven by the telescoping
  decrease of the shadow error,
* the external-output error bound available when the node is strictly
  output-passive with margin eps (valid as displayed for lam = 1; for
  lam < 1 the sharp constant would be 1/(4*lam*eps)).

All flags land in a :class:`ConvergenceReport` whose CSV serialization has
the fixed column set documented in the README.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field

import numpy as np

from .errors import BadParams, NegativeOmega, NotPSOP, OmegaZero
from .monolithic import solve_monolithic
from .node import PsopEstimate, estimate_psop_epsilon
from .operators import (
    CoupledProblem,
    OperatorImage,
    apply_I_plus_lambda_M,
    cayley_N,
    image_diff,
    image_norm,
    pair_diff,
    pair_norm,
    reflect,
    resolve_M,
    simulate_midpoint,
)
from .trajectory import (
    GridTrajectory,
    TrajPair,
    sup_norm,
    to_midpoints,
    weighted_norm,
)

__all__ = [
    "IterationState",
    "ConvergenceReport",
    "ReportRow",
    "REPORT_COLUMNS",
    "init_state",
    "iterate_once",
    "run",
    "check_theorem_a",
    "check_theorem_b_bound",
    "check_theorem_c_bound",
    "check_psop_bound",
]

CONSISTENCY_TOL = 1e-10
BOUND_TOL = 1e-8
MONOTONE_TOL = 1e-10

REPORT_COLUMNS = [
    "k",
    "dwz_l2",
    "dwz_w",
    "dxu_l2",
    "sup_err",
    "yext_err",
    "psop_bound",
    "monotone_ok",
    "domination_ok",
    "b_ok",
    "c_ok",
    "psop_ok",
]


@dataclass(frozen=True, eq=False)
class IterationState:
    """Iterate index, pair, and shadow, with the consistency invariant.

    ``shadow`` must equal (I + lam*M_h)(pair) within 1e-10 relative; this is
    checked at construction unless ``validate=False`` (used only to build
    deliberately corrupted states in tests).
    """

    k: int
    pair: TrajPair
    shadow: OperatorImage
    lam: float
    omega: float
    problem: CoupledProblem = field(repr=False)
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        if self.lam <= 0.0:
            raise BadParams(f"lambda must be positive, got {self.lam}")
        if self.omega < 0.0:
            raise NegativeOmega(f"omega must be >= 0, got {self.omega}")
        if validate:
            expected = apply_I_plus_lambda_M(self.problem, self.lam, self.pair)
            resid = image_norm(self.problem, image_diff(self.shadow, expected))
            scale = 1.0 + image_norm(self.problem, self.shadow)
            if resid > CONSISTENCY_TOL * scale:
                raise BadParams(
                    f"shadow inconsistent with pair: residual {resid:.3e} "
                    f"exceeds {CONSISTENCY_TOL:.0e} * {scale:.3e}"
                )


def init_state(problem: CoupledProblem, lam: float, omega: float) -> IterationState:
    """Starting iterate: u_0 = 0 and x_0 the decoupled midpoint solve.

    The state trajectory solves x' = A x + B_ext ue with the internal port
    forced to zero, so no coupling information enters the initial guess.
    """
    x = simulate_midpoint(problem.node, problem.grid, problem.x0, u_ext=problem.u_ext)
    u = GridTrajectory.zeros(problem.grid, "midpoint", problem.node.m_int)
    pair = TrajPair(x, u)
    shadow = apply_I_plus_lambda_M(problem, lam, pair)
    return IterationState(k=0, pair=pair, shadow=shadow, lam=lam, omega=omega, problem=problem)


def iterate_once(problem: CoupledProblem, state: IterationState) -> IterationState:
    """One sweep of the alternating resolvent iteration."""
    reflected = reflect(problem, state.pair, state.shadow)
    shadow_next = cayley_N(problem, state.lam, reflected)
    pair_next = resolve_M(problem, state.lam, shadow_next)
    return IterationState(
        k=state.k + 1,
        pair=pair_next,
        shadow=shadow_next,
        lam=state.lam,
        omega=state.omega,
        problem=problem,
    )


# -- error norms against a reference ------------------------------------------


@dataclass(frozen=True)
class _ErrorNorms:
    dwz_l2: float
    dwz_w: float
    dxu_l2: float
    dxu_w: float
    xerr_w: float
    sup_err: float
    yext_err: float


def _reference_shadow(problem: CoupledProblem, lam: float, reference: TrajPair) -> OperatorImage:
    return apply_I_plus_lambda_M(problem, lam, reference)


def _external_output(problem: CoupledProblem, pair: TrajPair) -> np.ndarray:
    node = problem.node
    x_mid = to_midpoints(pair.x)
    ye, _ = node.outputs(x_mid, problem.u_ext.values, pair.u.values)
    return ye


def _error_norms(
    problem: CoupledProblem,
    state: IterationState,
    reference: TrajPair,
    shadow_ref: OperatorImage,
) -> _ErrorNorms:
    omega = state.omega
    dpair = pair_diff(state.pair, reference)
    dshadow = image_diff(state.shadow, shadow_ref)
    dx = dpair.x
    H = problem.node.H
    dye = _external_output(problem, state.pair) - _external_output(problem, reference)
    yerr = math.sqrt(max(problem.grid.tau * float(np.sum(dye * dye)), 0.0))
    return _ErrorNorms(
        dwz_l2=image_norm(problem, dshadow, 0.0),
        dwz_w=image_norm(problem, dshadow, omega),
        dxu_l2=pair_norm(problem, dpair, 0.0),
        dxu_w=pair_norm(problem, dpair, omega),
        xerr_w=weighted_norm(dx, omega, H),
        sup_err=sup_norm(dx, H),
        yext_err=yerr,
    )


# -- theorem checks ------------------------------------------------------------


def check_theorem_a(
    problem: CoupledProblem,
    state: IterationState,
    reference: TrajPair,
    prev_state: IterationState | None = None,
) -> dict:
    """Monotone decrease and domination flags for one iterate.

    ``monotone_ok`` compares the shadow error to the previous iterate's (None
    when there is no predecessor); ``domination_ok`` compares the pair error
    to the shadow error at the same iterate.  Both are evaluated in the plain
    and the omega-weighted norms with relative tolerance 1e-10.
    """
    shadow_ref = _reference_shadow(problem, state.lam, reference)
    cur = _error_norms(problem, state, reference, shadow_ref)
    dom_slack = min(
        (cur.dwz_l2 - cur.dxu_l2) / (1.0 + cur.dwz_l2),
        (cur.dwz_w - cur.dxu_w) / (1.0 + cur.dwz_w),
    )
    out = {
        "domination_ok": dom_slack >= -MONOTONE_TOL,
        "domination_slack": dom_slack,
        "monotone_ok": None,
        "monotone_slack": None,
    }
    if prev_state is not None:
        prev = _error_norms(problem, prev_state, reference, shadow_ref)
        mono_slack = min(
            (prev.dwz_l2 - cur.dwz_l2) / (1.0 + prev.dwz_l2),
            (prev.dwz_w - cur.dwz_w) / (1.0 + prev.dwz_w),
        )
        out["monotone_ok"] = mono_slack >= -MONOTONE_TOL
        out["monotone_slack"] = mono_slack
    return out


def check_theorem_b_bound(
    problem: CoupledProblem,
    state_k: IterationState,
    state_k1: IterationState,
    reference: TrajPair,
) -> float:
    """Slack of the weighted L2 error bound between consecutive iterates.

    slack = (dwz_w(k)^2 - dwz_w(k+1)^2) / (4*lam*omega) - ||x - x_k||_{2,omega}^2

    Nonnegative up to quadrature error in the exponential weight (asserted
    elsewhere at 1e-8).  Requires omega > 0.
    """
    if state_k.omega <= 0.0:
        raise OmegaZero("weighted L2 bound requires omega > 0")
    lam, omega = state_k.lam, state_k.omega
    shadow_ref = _reference_shadow(problem, lam, reference)
    cur = _error_norms(problem, state_k, reference, shadow_ref)
    nxt = _error_norms(problem, state_k1, reference, shadow_ref)
    bound = (cur.dwz_w**2 - nxt.dwz_w**2) / (4.0 * lam * omega)
    return bound - cur.xerr_w**2


def check_theorem_c_bound(
    problem: CoupledProblem,
    state_k: IterationState,
    state_k1: IterationState,
    reference: TrajPair,
) -> float:
    """Slack of the uniform-in-time error bound between consecutive iterates.

    slack = exp(2*omega*T)/(2*lam) * (dwz_w(k)^2 - dwz_w(k+1)^2) - sup_err(k)^2

    Defined for omega >= 0.  Unlike the weighted L2 bound, this inequality
    is not guaranteed by the telescoping argument when the error profile
    peaks strictly inside the time window (the right-hand side only controls
    the final-time error exactly); runs report the slack honestly and flag
    negative values beyond tolerance.
    """
    lam, omega = state_k.lam, state_k.omega
    shadow_ref = _reference_shadow(problem, lam, reference)
    cur = _error_norms(problem, state_k, reference, shadow_ref)
    nxt = _error_norms(problem, state_k1, reference, shadow_ref)
    bound = math.exp(2.0 * omega * problem.grid.T) / (2.0 * lam) * (
        cur.dwz_w**2 - nxt.dwz_w**2
    )
    return bound - cur.sup_err**2


def check_psop_bound(
    problem: CoupledProblem,
    state_k: IterationState,
    state_k1: IterationState,
    reference: TrajPair,
    epsilon: float,
) -> float:
    """Slack of the external-output error bound for output-passive nodes.

    slack = (dwz_l2(k)^2 - dwz_l2(k+1)^2) / (4*eps) - ||ye - ye_k||_2^2

    using plain (unweighted) norms.  Raises NotPSOP for eps <= 0 or a
    vacuous (infinite) margin.
    """
    if not (epsilon > 0.0) or not math.isfinite(epsilon):
        raise NotPSOP(f"output bound needs a finite positive margin, got {epsilon}")
    lam = state_k.lam
    shadow_ref = _reference_shadow(problem, lam, reference)
    cur = _error_norms(problem, state_k, reference, shadow_ref)
    nxt = _error_norms(problem, state_k1, reference, shadow_ref)
    bound = (cur.dwz_l2**2 - nxt.dwz_l2**2) / (4.0 * epsilon)
    return bound - cur.yext_err**2


# -- the driver ----------------------------------------------------------------


@dataclass
class ReportRow:
    """One line of the convergence report (the CSV row)."""

    k: int
    dwz_l2: float | None = None
    dwz_w: float | None = None
    dxu_l2: float | None = None
    sup_err: float | None = None
    yext_err: float | None = None
    psop_bound: float | None = None
    monotone_ok: bool | None = None
    domination_ok: bool | None = None
    b_ok: bool | None = None
    c_ok: bool | None = None
    psop_ok: bool | None = None


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


@dataclass
class ConvergenceReport:
    """Per-iteration error norms, theorem flags, and run metadata."""

    lam: float
    omega: float
    rows: list[ReportRow]
    status: str
    epsilon: float | None = None
    epsilon_vacuous: bool = True
    update_norms: list[float] = field(default_factory=list)
    monotone_slacks: list[float] = field(default_factory=list)
    domination_slacks: list[float] = field(default_factory=list)
    b_slacks: list[float] = field(default_factory=list)
    c_slacks: list[float] = field(default_factory=list)
    psop_slacks: list[float] = field(default_factory=list)
    xerr_w: list[float] = field(default_factory=list)
    final_pair: TrajPair | None = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.rows) - 1

    @property
    def non_monotone_detected(self) -> bool:
        return any(r.monotone_ok is False for r in self.rows)

    def worst_slack(self, name: str) -> float | None:
        vals = getattr(self, name + "_slacks")
        return min(vals) if vals else None

    def all_checks_ok(self) -> bool:
        """True iff no evaluated flag is False."""
        for r in self.rows:
            for f in (r.monotone_ok, r.domination_ok, r.b_ok, r.c_ok, r.psop_ok):
                if f is False:
                    return False
        return True

    def final_row(self) -> ReportRow:
        return self.rows[-1]

    def to_csv(self, path_or_file) -> None:
        lines = [",".join(REPORT_COLUMNS)]
        for r in self.rows:
            lines.append(",".join(_fmt(getattr(r, c)) for c in REPORT_COLUMNS))
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", encoding="utf-8") as fh:
                fh.write(text)


def run(
    problem: CoupledProblem,
    lam: float = 1.0,
    omega: float | None = None,
    tol_update: float = 1e-10,
    max_iter: int = 500,
    reference: TrajPair | None = None,
    compute_reference: bool = True,
) -> ConvergenceReport:
    """Iterate to tolerance or iteration cap, flagging every theorem check.

    Stops as soon as ||pair_k - pair_{k-1}||_2 <= tol_update (status
    "converged") or after ``max_iter`` sweeps (status "max_iter").  When no
    reference is given one is computed monolithically, so the report always
    carries error norms unless ``compute_reference=False``.  A detected
    monotonicity violation sets a flag in the report; it never raises.

    omega defaults to 1/(2T).
    """
    if max_iter < 1:
        raise BadParams(f"max_iter must be >= 1, got {max_iter}")
    if omega is None:
        omega = 0.5 / problem.grid.T
    if reference is None and compute_reference:
        reference = solve_monolithic(problem)

    psop: PsopEstimate | None = None
    if reference is not None and problem.node.m_ext > 0:
        psop = estimate_psop_epsilon(problem.node)

    shadow_ref = None
    if reference is not None:
        shadow_ref = _reference_shadow(problem, lam, reference)

    states = [init_state(problem, lam, omega)]
    norms = []
    if reference is not None:
        norms.append(_error_norms(problem, states[-1], reference, shadow_ref))
    updates: list[float] = []
    status = "max_iter"
    for _ in range(max_iter):
        nxt = iterate_once(problem, states[-1])
        updates.append(pair_norm(problem, pair_diff(nxt.pair, states[-1].pair)))
        states.append(nxt)
        if reference is not None:
            norms.append(_error_norms(problem, nxt, reference, shadow_ref))
        if updates[-1] <= tol_update:
            status = "converged"
            break

    report = ConvergenceReport(
        lam=lam,
        omega=omega,
        rows=[],
        status=status,
        epsilon=(psop.epsilon if psop is not None else None),
        epsilon_vacuous=(psop.vacuous if psop is not None else True),
        update_norms=updates,
        final_pair=states[-1].pair,
    )
    K = len(states) - 1
    psop_active = (
        reference is not None
        and psop is not None
        and not psop.vacuous
        and psop.epsilon > 0.0
        and math.isfinite(psop.epsilon)
    )
    for k, state in enumerate(states):
        row = ReportRow(k=k)
        if reference is not None:
            cur = norms[k]
            row.dwz_l2 = cur.dwz_l2
            row.dwz_w = cur.dwz_w
            row.dxu_l2 = cur.dxu_l2
            row.sup_err = cur.sup_err
            row.yext_err = cur.yext_err
            dom_slack = min(
                (cur.dwz_l2 - cur.dxu_l2) / (1.0 + cur.dwz_l2),
                (cur.dwz_w - cur.dxu_w) / (1.0 + cur.dwz_w),
            )
            row.domination_ok = dom_slack >= -MONOTONE_TOL
            report.domination_slacks.append(dom_slack)
            report.xerr_w.append(cur.xerr_w)
            if k > 0:
                prev = norms[k - 1]
                mono_slack = min(
                    (prev.dwz_l2 - cur.dwz_l2) / (1.0 + prev.dwz_l2),
                    (prev.dwz_w - cur.dwz_w) / (1.0 + prev.dwz_w),
                )
                row.monotone_ok = mono_slack >= -MONOTONE_TOL
                report.monotone_slacks.append(mono_slack)
            if k < K:
                nxt = norms[k + 1]
                if omega > 0.0:
                    b_bound = (cur.dwz_w**2 - nxt.dwz_w**2) / (4.0 * lam * omega)
                    b_slack = b_bound - cur.xerr_w**2
                    row.b_ok = b_slack >= -BOUND_TOL
                    report.b_slacks.append(b_slack)
                c_bound = math.exp(2.0 * omega * problem.grid.T) / (2.0 * lam) * (
                    cur.dwz_w**2 - nxt.dwz_w**2
                )
                c_slack = c_bound - cur.sup_err**2
                row.c_ok = c_slack >= -BOUND_TOL
                report.c_slacks.append(c_slack)
                if psop_active:
                    p_bound = (cur.dwz_l2**2 - nxt.dwz_l2**2) / (4.0 * psop.epsilon)
                    p_slack = p_bound - cur.yext_err**2
                    row.psop_bound = p_bound
                    row.psop_ok = p_slack >= -BOUND_TOL
                    report.psop_slacks.append(p_slack)
        report.rows.append(row)
    return report
