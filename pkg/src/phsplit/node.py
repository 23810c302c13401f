"""Finite-dimensional dissipative system nodes and their certificates.

A node is a linear input/state/output system

    x' = A x + B_ext ue + B_int ui
    ye = C_ext x + D_11 ue + D_12 ui
    yi = C_int x + D_21 ue + D_22 ui

together with a symmetric positive definite energy weight ``H`` defining the
storage ``E(x) = x^T H x / 2``.  Ports are split into an *external* group
(driven by data, read by the output bound) and an *internal* group (closed by
a coupling ``y = N_c u`` with negative semidefinite symmetric part).

Passivity of the node is certified by negative semidefiniteness of

    W = sym [[H A,    H B_ext,  H B_int],
             [-C_ext, -D_11,    -D_12 ],
             [-C_int, -D_21,    -D_22 ]]

which is the matrix form of the dissipation inequality
``d/dt E <= <ue, ye> + <ui, yi>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CouplingNotMonotone,
    DimensionMismatch,
    EmptyList,
    NotDissipative,
    SingularResolvent,
    WeightNotSPD,
)

__all__ = [
    "SystemNode",
    "CouplingOperator",
    "DissipativityReport",
    "PsopEstimate",
    "assemble_node",
    "check_dissipativity",
    "check_coupling_monotone",
    "estimate_psop_epsilon",
    "transfer_function",
    "compose_diagonal",
]

DISSIPATIVITY_TOL = 1e-10


def _as_matrix(a, rows: int, cols: int, name: str) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim == 1:
        # Interpret a vector as a single column or single row when unambiguous.
        if cols == 1:
            m = m.reshape(-1, 1)
        else:
            m = m.reshape(1, -1)
    if m.shape != (rows, cols):
        raise DimensionMismatch(f"{name} must have shape {(rows, cols)}, got {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class SystemNode:
    """Immutable container for one assembled node.  Use :func:`assemble_node`."""

    A: np.ndarray = field(repr=False)
    B_ext: np.ndarray = field(repr=False)
    B_int: np.ndarray = field(repr=False)
    C_ext: np.ndarray = field(repr=False)
    C_int: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m_ext(self) -> int:
        return self.C_ext.shape[0]

    @property
    def m_int(self) -> int:
        return self.C_int.shape[0]

    @property
    def D11(self) -> np.ndarray:
        return self.D[: self.m_ext, : self.m_ext]

    @property
    def D12(self) -> np.ndarray:
        return self.D[: self.m_ext, self.m_ext :]

    @property
    def D21(self) -> np.ndarray:
        return self.D[self.m_ext :, : self.m_ext]

    @property
    def D22(self) -> np.ndarray:
        return self.D[self.m_ext :, self.m_ext :]

    def certificate_matrix(self) -> np.ndarray:
        """Symmetric part of the energy-weighted node matrix (see module doc)."""
        n, me, mi = self.n, self.m_ext, self.m_int
        K = np.zeros((n + me + mi, n + me + mi))
        K[:n, :n] = self.H @ self.A
        K[:n, n : n + me] = self.H @ self.B_ext
        K[:n, n + me :] = self.H @ self.B_int
        K[n : n + me, :n] = -self.C_ext
        K[n + me :, :n] = -self.C_int
        K[n:, n:] = -self.D
        return 0.5 * (K + K.T)

    def outputs(self, x_mid: np.ndarray, u_ext: np.ndarray, u_int: np.ndarray):
        """External and internal outputs for midpoint samples (rows = times)."""
        ye = x_mid @ self.C_ext.T + u_ext @ self.D11.T + u_int @ self.D12.T
        yi = x_mid @ self.C_int.T + u_ext @ self.D21.T + u_int @ self.D22.T
        return ye, yi


def assemble_node(A, B_ext, B_int, C_ext, C_int, D, H) -> SystemNode:
    """Validate shapes and the energy weight, and freeze a :class:`SystemNode`.

    Parameters
    ----------
    A : (n, n) array
    B_ext : (n, m_ext) array
    B_int : (n, m_int) array
    C_ext : (m_ext, n) array
    C_int : (m_int, n) array
    D : (m_ext + m_int, m_ext + m_int) array, or None for zero feedthrough
    H : (n, n) symmetric positive definite array

    Raises
    ------
    DimensionMismatch
        If any block is inconsistent with the inferred (n, m_ext, m_int).
    WeightNotSPD
        If H is not symmetric within 1e-12 relative or has an eigenvalue <= 0.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    n = A.shape[0]

    def input_block(b, name):
        m = np.asarray(b, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        elif m.ndim == 1:
            m = m.reshape(-1, 1)
        if m.ndim != 2 or m.shape[0] != n:
            raise DimensionMismatch(f"{name} must have {n} rows, got shape {m.shape}")
        return m

    B_ext = input_block(B_ext, "B_ext")
    B_int = input_block(B_int, "B_int")
    m_ext, m_int = B_ext.shape[1], B_int.shape[1]
    C_ext = _as_matrix(C_ext, m_ext, n, "C_ext") if m_ext else np.zeros((0, n))
    C_int = _as_matrix(C_int, m_int, n, "C_int") if m_int else np.zeros((0, n))
    m = m_ext + m_int
    D = np.zeros((m, m)) if D is None else _as_matrix(D, m, m, "D")

    H = _as_matrix(H, n, n, "H") if n else np.zeros((0, 0))
    hnorm = np.linalg.norm(H)
    if np.linalg.norm(H - H.T) > 1e-12 * (1.0 + hnorm):
        raise WeightNotSPD("H is not symmetric within 1e-12 relative")
    if n and np.min(np.linalg.eigvalsh(0.5 * (H + H.T))) <= 0.0:
        raise WeightNotSPD("H has a nonpositive eigenvalue")

    return SystemNode(A=A, B_ext=B_ext, B_int=B_int, C_ext=C_ext, C_int=C_int, D=D, H=H)


@dataclass(frozen=True)
class DissipativityReport:
    """Outcome of the passivity certificate for one node."""

    max_sym_eig: float
    is_dissipative: bool
    margin: float


def check_dissipativity(node: SystemNode, tol: float = DISSIPATIVITY_TOL) -> DissipativityReport:
    """Largest eigenvalue of the certificate matrix; dissipative iff <= tol."""
    W = node.certificate_matrix()
    if W.shape[0] == 0:
        return DissipativityReport(0.0, True, 0.0)
    lam = float(np.max(np.linalg.eigvalsh(W)))
    return DissipativityReport(max_sym_eig=lam, is_dissipative=lam <= tol, margin=-lam)


@dataclass(frozen=True, eq=False)
class CouplingOperator:
    """Static coupling y = N_c u whose symmetric part is negative semidefinite."""

    N_c: np.ndarray = field(repr=False)
    tol: float = DISSIPATIVITY_TOL

    def __post_init__(self):
        M = np.asarray(self.N_c, dtype=float)
        if M.ndim == 0:
            M = M.reshape(1, 1)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"N_c must be square, got shape {M.shape}")
        object.__setattr__(self, "N_c", M)
        if not check_coupling_monotone(M, tol=self.tol):
            raise CouplingNotMonotone(
                "coupling has a symmetric part with a positive eigenvalue"
            )

    @property
    def m(self) -> int:
        return self.N_c.shape[0]


def check_coupling_monotone(N_c, tol: float = DISSIPATIVITY_TOL) -> bool:
    """True iff sym(N_c) is negative semidefinite within ``tol``."""
    M = np.asarray(N_c, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"N_c must be square, got shape {M.shape}")
    if M.shape[0] == 0:
        return True
    return float(np.max(np.linalg.eigvalsh(0.5 * (M + M.T)))) <= tol


@dataclass(frozen=True)
class PsopEstimate:
    """Largest epsilon with W + eps * G^T G <= 0; vacuous if G = 0."""

    epsilon: float
    vacuous: bool


def estimate_psop_epsilon(
    node: SystemNode,
    tol: float = DISSIPATIVITY_TOL,
    rel_width: float = 1e-6,
) -> PsopEstimate:
    """Output-passivity margin w.r.t. the external output, by bisection.

    Finds the largest ``eps >= 0`` such that ``W + eps * G^T G`` stays
    negative semidefinite, where ``W`` is the node certificate matrix and
    ``G = [C_ext  D_11  D_12]`` maps (x, ue, ui) to the external output.
    The bracket is shrunk to relative width ``rel_width``.

    Raises
    ------
    NotDissipative
        If the node itself fails the passivity certificate.

    Notes
    -----
    A node without external output rows (``G = 0``) satisfies the defining
    inequality for every eps; the estimate is returned as ``inf`` with
    ``vacuous=True`` so callers can skip output bounds explicitly.
    """
    report = check_dissipativity(node, tol=tol)
    if not report.is_dissipative:
        raise NotDissipative(
            f"node is not dissipative (max_sym_eig={report.max_sym_eig:.3e})"
        )
    W = node.certificate_matrix()
    G = np.hstack([node.C_ext, node.D11, node.D12])
    if G.size == 0 or not np.any(G):
        return PsopEstimate(epsilon=float("inf"), vacuous=True)

    GtG = G.T @ G
    feas_tol = 1e-12 * (1.0 + float(np.linalg.norm(W, 2)))

    def feasible(eps: float) -> bool:
        return float(np.max(np.linalg.eigvalsh(W + eps * GtG))) <= feas_tol

    sigma = np.linalg.svd(G, compute_uv=False)
    lam_min_pos = float(np.min(sigma[sigma > 1e-14 * sigma.max()]) ** 2)
    hi = 2.0 * float(np.linalg.norm(W, 2)) / lam_min_pos
    if hi == 0.0 or feasible(hi):
        # W = 0 on range(G^T G) up to tolerance; margin is the bracket cap.
        return PsopEstimate(epsilon=float(hi), vacuous=False)
    lo = 0.0
    # 120 halvings shrink the bracket below any practical rel_width; the cap
    # keeps the zero-margin case (lo stuck at 0) from looping to underflow.
    for _ in range(120):
        if hi - lo <= rel_width * hi:
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return PsopEstimate(epsilon=float(lo), vacuous=False)


def transfer_function(node: SystemNode, s: complex) -> np.ndarray:
    """Full-port transfer matrix C (sI - A)^{-1} B + D at the complex point s.

    Ports are stacked external-first.  A node with empty state returns D.

    Raises
    ------
    SingularResolvent
        If (sI - A) is singular at ``s``.
    """
    B = np.hstack([node.B_ext, node.B_int])
    C = np.vstack([node.C_ext, node.C_int])
    if node.n == 0:
        return node.D.astype(complex)
    M = s * np.eye(node.n) - node.A
    try:
        X = np.linalg.solve(M, B.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(f"sI - A singular at s={s}") from exc
    if not np.all(np.isfinite(X)):
        raise SingularResolvent(f"sI - A numerically singular at s={s}")
    return C @ X + node.D


def compose_diagonal(nodes: list[SystemNode]) -> SystemNode:
    """Block-diagonal composition of nodes.

    States are stacked in list order; the composed external port group is the
    concatenation of the nodes' external ports (in list order), and likewise
    for the internal group, so cross-group ordering is normalized.
    """
    if not nodes:
        raise EmptyList("compose_diagonal needs at least one node")
    if len(nodes) == 1:
        return nodes[0]

    n = sum(nd.n for nd in nodes)
    me = sum(nd.m_ext for nd in nodes)
    mi = sum(nd.m_int for nd in nodes)
    A = np.zeros((n, n))
    H = np.zeros((n, n))
    B_ext = np.zeros((n, me))
    B_int = np.zeros((n, mi))
    C_ext = np.zeros((me, n))
    C_int = np.zeros((mi, n))
    D = np.zeros((me + mi, me + mi))

    i = je = ji = 0
    for nd in nodes:
        sx = slice(i, i + nd.n)
        se = slice(je, je + nd.m_ext)
        si = slice(ji, ji + nd.m_int)
        A[sx, sx] = nd.A
        H[sx, sx] = nd.H
        B_ext[sx, se] = nd.B_ext
        B_int[sx, si] = nd.B_int
        C_ext[se, sx] = nd.C_ext
        C_int[si, sx] = nd.C_int
        De = slice(je, je + nd.m_ext)
        Di = slice(me + ji, me + ji + nd.m_int)
        D[De, De] = nd.D11
        D[De, Di] = nd.D12
        D[Di, De] = nd.D21
        D[Di, Di] = nd.D22
        i += nd.n
        je += nd.m_ext
        ji += nd.m_int

    return assemble_node(A, B_ext, B_int, C_ext, C_int, D, H)
