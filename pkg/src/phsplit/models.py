"""Discretized example models: 1-d/2-d waves, a heat rod with memory, and
the coupled demo problems built from them.

All builders produce :class:`~phsplit.node.SystemNode` objects whose
passivity certificate holds *exactly* (up to roundoff), not merely up to
discretization error.  This is achieved by

* staggered grids (velocities at cell centers, strains at faces) with the
  transport stencil skew-adjoint in the energy inner product,
* collocated ports: every input enters where the matching output is read,
  so B = H^{-1} C^T up to the face-measure scaling, and
* folding the boundary quadrature weight sqrt(face length) into the port
  variables, so the Euclidean port pairing equals the physical boundary
  power (trivial in 1-d where the boundary is a point).

Boundary-port conventions use the outward normal: stress ports carry
nu . (T grad z), so on a "left" edge the sign of the strain state flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, DimensionMismatch, NonconformingInterface
from .node import CouplingOperator, SystemNode, assemble_node, compose_diagonal
from .operators import CoupledProblem
from .trajectory import MIDPOINT, GridTrajectory, TimeGrid

__all__ = [
    "Wave1dParams",
    "HeatCGParams",
    "Wave2dParams",
    "EdgeSpec",
    "build_wave1d",
    "build_heat_cg1d",
    "build_wave2d_rect",
    "build_wave_heat_problem",
    "build_lshape_problem",
    "build_scalar_demo",
    "wave1d_default_state",
    "heat_default_state",
    "wave2d_default_state",
    "heat_kernel_total_mass",
    "scalar_demo_pole",
]

VELOCITY_IN = "velocity_in_force_out"
FORCE_IN = "force_in_velocity_out"

_PORT_MODES = (VELOCITY_IN, FORCE_IN)


def _per_cell(value, count: int, name: str, positive: bool) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (count,)).copy()
    if positive and np.any(arr <= 0.0):
        raise BadParams(f"{name} must be positive everywhere")
    if not positive and np.any(arr < 0.0):
        raise BadParams(f"{name} must be nonnegative everywhere")
    return arr


# ---------------------------------------------------------------------------
# 1-d wave on (-1, 0)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Wave1dParams:
    """Lossy 1-d wave v_tt = (T v_z)_z / rho - (d/rho) v_t on (-1, 0).

    ``rho`` (density), ``modulus`` (stiffness T) and ``damping`` (d >= 0)
    are scalars or per-cell arrays of length ``n_cells``.  The left end
    z = -1 is clamped unless an external port is requested; the right end
    z = 0 carries the internal (coupling) port.
    """

    n_cells: int
    rho: object = 1.0
    modulus: object = 1.0
    damping: object = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise BadParams(f"wave needs at least 2 cells, got {self.n_cells}")
        object.__setattr__(self, "rho", _per_cell(self.rho, self.n_cells, "rho", True))
        object.__setattr__(
            self, "modulus", _per_cell(self.modulus, self.n_cells, "modulus", True)
        )
        object.__setattr__(
            self, "damping", _per_cell(self.damping, self.n_cells, "damping", False)
        )


def _face_modulus(modulus: np.ndarray) -> np.ndarray:
    """Face values of T: arithmetic means inside, copies at the two ends."""
    Tf = np.empty(modulus.size + 1)
    Tf[1:-1] = 0.5 * (modulus[:-1] + modulus[1:])
    Tf[0] = modulus[0]
    Tf[-1] = modulus[-1]
    return Tf


def build_wave1d(
    params: Wave1dParams,
    port_mode: str = VELOCITY_IN,
    external_mode: str | None = None,
) -> SystemNode:
    """Staggered-grid node for the 1-d wave.

    State layout: momenta p = rho*v_t at the ``n_cells`` cell centers,
    then strains q = v_z at the kept faces in increasing position.  The
    internal port sits at z = 0 with ``port_mode``:

    * ``"velocity_in_force_out"``: u is the boundary velocity, y = T q the
      boundary stress (face strain stays a state);
    * ``"force_in_velocity_out"``: u is the outward boundary stress
      (the face strain is eliminated), y the adjacent cell velocity.

    ``external_mode`` opens an optional external port at z = -1 with the
    same two conventions (None keeps the end clamped).  The energy weight is
    diag(h/rho) on momenta and diag(h*T_face) on strains, so a closed
    undamped node has an exactly skew energy-weighted generator.
    """
    if port_mode not in _PORT_MODES:
        raise BadParams(f"unknown port mode {port_mode!r}")
    if external_mode is not None and external_mode not in _PORT_MODES:
        raise BadParams(f"unknown external port mode {external_mode!r}")
    nc = params.n_cells
    h = 1.0 / nc
    rho, d = params.rho, params.damping
    Tf = _face_modulus(params.modulus)

    keep_left = external_mode != FORCE_IN
    keep_right = port_mode == VELOCITY_IN
    faces = ([0] if keep_left else []) + list(range(1, nc)) + ([nc] if keep_right else [])
    qi = {k: nc + i for i, k in enumerate(faces)}
    n = nc + len(faces)
    m_ext = 0 if external_mode is None else 1

    A = np.zeros((n, n))
    B_ext = np.zeros((n, m_ext))
    B_int = np.zeros((n, 1))
    C_ext = np.zeros((m_ext, n))
    C_int = np.zeros((1, n))

    for c in range(nc):
        A[c, c] = -d[c] / rho[c]
        if c > 0 or keep_left:
            A[c, qi[c]] = -Tf[c] / h
        if c + 1 < nc or keep_right:
            A[c, qi[c + 1]] = Tf[c + 1] / h
    for k in range(1, nc):
        A[qi[k], k] = 1.0 / (rho[k] * h)
        A[qi[k], k - 1] = -1.0 / (rho[k - 1] * h)

    if keep_left:
        A[qi[0], 0] = 1.0 / (rho[0] * h)  # ghost velocity 0 (clamp) or external input
        if external_mode == VELOCITY_IN:
            B_ext[qi[0], 0] = -1.0 / h
            C_ext[0, qi[0]] = -Tf[0]  # outward stress nu.(Tq) with nu = -1
    else:
        B_ext[0, 0] = 1.0 / h  # prescribed outward stress replaces (Tq) at the face
        C_ext[0, 0] = 1.0 / rho[0]

    if keep_right:
        A[qi[nc], nc - 1] = -1.0 / (rho[nc - 1] * h)
        B_int[qi[nc], 0] = 1.0 / h
        C_int[0, qi[nc]] = Tf[nc]
    else:
        B_int[nc - 1, 0] = 1.0 / h
        C_int[0, nc - 1] = 1.0 / rho[nc - 1]

    H = np.diag(np.concatenate([h / rho, h * Tf[faces]]))
    return assemble_node(A, B_ext, B_int, C_ext, C_int, None, H)


def wave1d_default_state(
    params: Wave1dParams,
    port_mode: str = VELOCITY_IN,
    external_mode: str | None = None,
) -> np.ndarray:
    """Smooth nonzero start: a sine momentum bump, zero strain."""
    nc = params.n_cells
    h = 1.0 / nc
    n_faces = (1 if external_mode != FORCE_IN else 0) + (nc - 1) + (1 if port_mode == VELOCITY_IN else 0)
    centers = (np.arange(nc) + 0.5) * h  # position + 1 in (0, 1)
    return np.concatenate([np.sin(np.pi * centers), np.zeros(n_faces)])


# ---------------------------------------------------------------------------
# 1-d heat rod with a fading-memory flux on (0, 1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeatCGParams:
    """Heat rod w_t = d_zz(w) + convolution flux, exponential kernel exp(-s).

    The memory term is realized by the auxiliary field
    m(t) = integral_0^inf exp(-s) w(t - s) ds, which satisfies m' = w - m and
    turns the dynamics into the local system

        w_t = d_zz(w + m),   m' = w - m,   w(1) = m(1) = 0,

    with flux input u = -d_z(w + m)(0) and output y = w(0).  ``n_nodes``
    counts the kept grid nodes on [0, 1); the clamped right end is
    eliminated.
    """

    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < 2:
            raise BadParams(f"heat rod needs at least 2 nodes, got {self.n_nodes}")


def heat_kernel_total_mass() -> float:
    """Total mass of the memory kernel: integral_0^inf exp(-s) ds = 1 exactly."""
    return 1.0


def build_heat_cg1d(params: HeatCGParams) -> SystemNode:
    """Finite-volume node for the heat rod with memory.

    Nodes i = 0..N-1 at z = i/N (half cell at the flux end z = 0); right
    Dirichlet end eliminated.  With lumped mass Mw and stiffness K (the
    quadratic form of |d_z .|^2), the state (w, m) evolves by

        Mw w' = -K (w + m) + e_0 u,    m' = w - m,    y = w_0,

    and the storage E = (w' Mw w + m' K m)/2 obeys
    E' = -|w|_K^2 - |m|_K^2 + u y exactly: the node is strictly dissipative
    in the interior and exactly passive at the port.
    """
    N = params.n_nodes
    h = 1.0 / N
    mw = np.full(N, h)
    mw[0] = 0.5 * h  # half control volume at the flux boundary
    K = np.zeros((N, N))
    K[0, 0] = 1.0 / h
    for i in range(1, N):
        K[i, i] = 2.0 / h
        K[i, i - 1] = K[i - 1, i] = -1.0 / h

    Minv = 1.0 / mw
    A = np.zeros((2 * N, 2 * N))
    A[:N, :N] = -(Minv[:, None] * K)
    A[:N, N:] = -(Minv[:, None] * K)
    A[N:, :N] = np.eye(N)
    A[N:, N:] = -np.eye(N)
    B_int = np.zeros((2 * N, 1))
    B_int[0, 0] = Minv[0]
    C_int = np.zeros((1, 2 * N))
    C_int[0, 0] = 1.0
    H = np.zeros((2 * N, 2 * N))
    H[:N, :N] = np.diag(mw)
    H[N:, N:] = K
    return assemble_node(A, np.zeros((2 * N, 0)), B_int, np.zeros((0, 2 * N)), C_int, None, H)


def heat_default_state(params: HeatCGParams) -> np.ndarray:
    """Cosine temperature profile vanishing at the clamped end, zero memory."""
    N = params.n_nodes
    z = np.arange(N) / N
    return np.concatenate([np.cos(0.5 * np.pi * z), np.zeros(N)])


# ---------------------------------------------------------------------------
# 2-d wave on a rectangle
# ---------------------------------------------------------------------------

_EDGES = ("left", "right", "bottom", "top")
_ROLES = ("clamped", "external_stress", "interface_stress_in", "interface_velocity_in")


@dataclass(frozen=True)
class EdgeSpec:
    """Role of one boundary edge; ``span`` is a half-open face-index range
    along the edge (None = every face).  Faces outside the span are clamped."""

    role: str
    span: tuple[int, int] | None = None


@dataclass(frozen=True, eq=False)
class Wave2dParams:
    """Lossy 2-d wave on a rectangle (0,Lx) x (0,Ly) with per-edge ports.

    ``rho``, ``modulus``, ``damping`` are scalars or (nx, ny) cell arrays.
    ``edges`` maps edge names ("left", "right", "bottom", "top") to
    :class:`EdgeSpec`; unnamed edges are clamped (homogeneous velocity).
    """

    extent: tuple[float, float]
    nx: int
    ny: int
    rho: object = 1.0
    modulus: object = 1.0
    damping: object = 0.0
    edges: dict = field(default_factory=dict)

    def __post_init__(self):
        Lx, Ly = self.extent
        if not (Lx > 0.0 and Ly > 0.0):
            raise BadParams(f"extent must be positive, got {self.extent}")
        if self.nx < 1 or self.ny < 1:
            raise BadParams(f"grid counts must be >= 1, got ({self.nx}, {self.ny})")
        for fldname in ("rho", "modulus", "damping"):
            val = np.broadcast_to(
                np.asarray(getattr(self, fldname), dtype=float), (self.nx, self.ny)
            ).copy()
            if fldname == "damping":
                if np.any(val < 0.0):
                    raise BadParams("damping must be nonnegative everywhere")
            elif np.any(val <= 0.0):
                raise BadParams(f"{fldname} must be positive everywhere")
            object.__setattr__(self, fldname, val)
        for name, spec in self.edges.items():
            if name not in _EDGES:
                raise BadParams(f"unknown edge name {name!r}")
            if spec.role not in _ROLES:
                raise BadParams(f"unknown edge role {spec.role!r}")
            count = self.ny if name in ("left", "right") else self.nx
            lo, hi = spec.span if spec.span is not None else (0, count)
            if not (0 <= lo < hi <= count):
                raise BadParams(f"edge {name}: span {spec.span} not within 0..{count}")


def _edge_faces(params: Wave2dParams, name: str) -> list[int]:
    spec = params.edges.get(name)
    if spec is None or spec.role == "clamped":
        return []
    count = params.ny if name in ("left", "right") else params.nx
    lo, hi = spec.span if spec.span is not None else (0, count)
    return list(range(lo, hi))


def build_wave2d_rect(params: Wave2dParams) -> SystemNode:
    """Staggered (MAC) node for the 2-d wave with per-edge boundary ports.

    States: cell momenta p = rho z_t, then x-strains at kept vertical faces,
    then y-strains at kept horizontal faces (each group in row-major order,
    first index fastest).  Ports are collected edge by edge in the order
    left, right, bottom, top, by increasing face index; the port dimension
    contributed by an edge equals the number of faces in its span.  Port
    variables carry the sqrt(face length) quadrature weight, making the
    Euclidean port pairing equal to the physical boundary power.
    """
    nx, ny = params.nx, params.ny
    Lx, Ly = params.extent
    hx, hy = Lx / nx, Ly / ny
    rho, d = params.rho, params.damping

    Tx = np.empty((nx + 1, ny))
    Tx[1:nx] = 0.5 * (params.modulus[:-1] + params.modulus[1:])
    Tx[0], Tx[nx] = params.modulus[0], params.modulus[-1]
    Ty = np.empty((nx, ny + 1))
    Ty[:, 1:ny] = 0.5 * (params.modulus[:, :-1] + params.modulus[:, 1:])
    Ty[:, 0], Ty[:, ny] = params.modulus[:, 0], params.modulus[:, -1]

    # Faces on a stress-in edge are eliminated from the state.
    drop_x = np.zeros((nx + 1, ny), dtype=bool)
    drop_y = np.zeros((nx, ny + 1), dtype=bool)
    for name in _EDGES:
        spec = params.edges.get(name)
        if spec is None or spec.role not in ("external_stress", "interface_stress_in"):
            continue
        for f in _edge_faces(params, name):
            if name == "left":
                drop_x[0, f] = True
            elif name == "right":
                drop_x[nx, f] = True
            elif name == "bottom":
                drop_y[f, 0] = True
            else:
                drop_y[f, ny] = True

    def cell(i, j):
        return i + nx * j

    qx_index = -np.ones((nx + 1, ny), dtype=int)
    qy_index = -np.ones((nx, ny + 1), dtype=int)
    pos = nx * ny
    for j in range(ny):
        for i in range(nx + 1):
            if not drop_x[i, j]:
                qx_index[i, j] = pos
                pos += 1
    for j in range(ny + 1):
        for i in range(nx):
            if not drop_y[i, j]:
                qy_index[i, j] = pos
                pos += 1
    n = pos

    ports = []  # (kind, edge, face, weight) in declaration order
    for name in _EDGES:
        spec = params.edges.get(name)
        if spec is None or spec.role == "clamped":
            continue
        kind = "ext" if spec.role == "external_stress" else "int"
        for f in _edge_faces(params, name):
            ports.append((kind, name, f, spec.role))
    m_ext = sum(1 for p in ports if p[0] == "ext")
    m_int = len(ports) - m_ext

    A = np.zeros((n, n))
    B_ext = np.zeros((n, m_ext))
    B_int = np.zeros((n, m_int))
    C_ext = np.zeros((m_ext, n))
    C_int = np.zeros((m_int, n))

    # Momentum rows: divergence of the stress plus damping.
    for j in range(ny):
        for i in range(nx):
            c = cell(i, j)
            A[c, c] = -d[i, j] / rho[i, j]
            for (ii, sgn) in ((i + 1, 1.0), (i, -1.0)):
                k = qx_index[ii, j]
                if k >= 0:
                    A[c, k] += sgn * Tx[ii, j] / hx
            for (jj, sgn) in ((j + 1, 1.0), (j, -1.0)):
                k = qy_index[i, jj]
                if k >= 0:
                    A[c, k] += sgn * Ty[i, jj] / hy

    # Strain rows: velocity differences; boundary ghosts are zero (clamp).
    for j in range(ny):
        for i in range(nx + 1):
            k = qx_index[i, j]
            if k < 0:
                continue
            if i < nx:
                A[k, cell(i, j)] += 1.0 / (rho[i, j] * hx)
            if i > 0:
                A[k, cell(i - 1, j)] -= 1.0 / (rho[i - 1, j] * hx)
    for j in range(ny + 1):
        for i in range(nx):
            k = qy_index[i, j]
            if k < 0:
                continue
            if j < ny:
                A[k, cell(i, j)] += 1.0 / (rho[i, j] * hy)
            if j > 0:
                A[k, cell(i, j - 1)] -= 1.0 / (rho[i, j - 1] * hy)

    ie = ii = 0
    for kind, name, f, role in ports:
        horizontal = name in ("bottom", "top")
        flen = hx if horizontal else hy
        sq = math.sqrt(flen)
        if kind == "ext":
            col, B, C = ie, B_ext, C_ext
            ie += 1
        else:
            col, B, C = ii, B_int, C_int
            ii += 1
        if role in ("external_stress", "interface_stress_in"):
            # Prescribed outward stress enters the adjacent momentum cell;
            # output is the adjacent cell velocity.
            if name == "left":
                ci, cj, step = 0, f, hx
            elif name == "right":
                ci, cj, step = nx - 1, f, hx
            elif name == "bottom":
                ci, cj, step = f, 0, hy
            else:
                ci, cj, step = f, ny - 1, hy
            B[cell(ci, cj), col] = 1.0 / (step * sq)
            C[col, cell(ci, cj)] = sq / rho[ci, cj]
        else:
            # Prescribed boundary velocity replaces the ghost in the strain
            # row; output is the outward stress at the face.
            if name == "left":
                k = qx_index[0, f]
                B[k, col] = -1.0 / (hx * sq)
                C[col, k] = -sq * Tx[0, f]
            elif name == "right":
                k = qx_index[nx, f]
                B[k, col] = 1.0 / (hx * sq)
                C[col, k] = sq * Tx[nx, f]
            elif name == "bottom":
                k = qy_index[f, 0]
                B[k, col] = -1.0 / (hy * sq)
                C[col, k] = -sq * Ty[f, 0]
            else:
                k = qy_index[f, ny]
                B[k, col] = 1.0 / (hy * sq)
                C[col, k] = sq * Ty[f, ny]

    hdiag = np.empty(n)
    for j in range(ny):
        for i in range(nx):
            hdiag[cell(i, j)] = hx * hy / rho[i, j]
    for j in range(ny):
        for i in range(nx + 1):
            k = qx_index[i, j]
            if k >= 0:
                hdiag[k] = hx * hy * Tx[i, j]
    for j in range(ny + 1):
        for i in range(nx):
            k = qy_index[i, j]
            if k >= 0:
                hdiag[k] = hx * hy * Ty[i, j]

    return assemble_node(A, B_ext, B_int, C_ext, C_int, None, np.diag(hdiag))


def wave2d_default_state(params: Wave2dParams) -> np.ndarray:
    """Product-of-sines momentum bump over the rectangle, zero strain."""
    node = build_wave2d_rect(params)
    nx, ny = params.nx, params.ny
    Lx, Ly = params.extent
    x0 = np.zeros(node.n)
    for j in range(ny):
        for i in range(nx):
            xc, yc = (i + 0.5) * Lx / nx, (j + 0.5) * Ly / ny
            x0[i + nx * j] = math.sin(math.pi * xc / Lx) * math.sin(math.pi * yc / Ly)
    return x0


# ---------------------------------------------------------------------------
# Coupled demo problems
# ---------------------------------------------------------------------------


def _resolve_u_ext(grid: TimeGrid, m_ext: int, u_ext) -> GridTrajectory:
    if u_ext is None:
        return GridTrajectory.zeros(grid, MIDPOINT, m_ext)
    if not isinstance(u_ext, GridTrajectory):
        raise DimensionMismatch("u_ext must be a midpoint GridTrajectory or None")
    return u_ext


def build_wave_heat_problem(
    wave_params: Wave1dParams,
    heat_params: HeatCGParams,
    grid: TimeGrid,
    x0=None,
    u_ext=None,
    external_mode: str | None = None,
) -> CoupledProblem:
    """Wave on (-1,0) coupled to the memory heat rod on (0,1) at z = 0.

    The wave takes the rod's boundary temperature as velocity input
    (u1 = y2) and the rod receives the negated wave stress as flux input
    (u2 = -y1), i.e. the coupling matrix on stacked ports is
    [[0, -1], [1, 0]] (exactly skew).  ``external_mode`` optionally opens a
    port at the far wave end z = -1.  ``x0 = None`` uses the default smooth
    profiles of both bodies.
    """
    wave = build_wave1d(wave_params, VELOCITY_IN, external_mode)
    heat = build_heat_cg1d(heat_params)
    node = compose_diagonal([wave, heat])
    coupling = CouplingOperator(np.array([[0.0, -1.0], [1.0, 0.0]]))
    if x0 is None:
        x0 = np.concatenate(
            [
                wave1d_default_state(wave_params, VELOCITY_IN, external_mode),
                heat_default_state(heat_params),
            ]
        )
    return CoupledProblem(
        node=node,
        coupling=coupling,
        grid=grid,
        x0=x0,
        u_ext=_resolve_u_ext(grid, node.m_ext, u_ext),
    )


def default_lshape_params(refine: int = 1, damping=0.0):
    """Two conforming rectangles forming an L: (0,1)x(0,2) and (1,2)x(0,1).

    Body 1 carries the external stress port on its top edge and the
    interface (stress input, velocity output) on the lower half of its
    right edge; body 2 receives velocity input on its whole left edge.
    """
    if refine < 1:
        raise BadParams(f"refine must be >= 1, got {refine}")
    r = refine
    p1 = Wave2dParams(
        extent=(1.0, 2.0),
        nx=4 * r,
        ny=8 * r,
        damping=damping,
        edges={
            "top": EdgeSpec("external_stress"),
            "right": EdgeSpec("interface_stress_in", span=(0, 4 * r)),
        },
    )
    p2 = Wave2dParams(
        extent=(1.0, 1.0),
        nx=4 * r,
        ny=4 * r,
        damping=damping,
        edges={"left": EdgeSpec("interface_velocity_in")},
    )
    return p1, p2


def _interface_faces(params: Wave2dParams):
    for name in _EDGES:
        spec = params.edges.get(name)
        if spec is not None and spec.role.startswith("interface"):
            count = len(_edge_faces(params, name))
            flen = (
                params.extent[0] / params.nx
                if name in ("bottom", "top")
                else params.extent[1] / params.ny
            )
            return count, flen
    return 0, 0.0


def build_lshape_problem(
    grid: TimeGrid,
    params1: Wave2dParams | None = None,
    params2: Wave2dParams | None = None,
    x0=None,
    u_ext=None,
    refine: int = 1,
    damping=0.0,
) -> CoupledProblem:
    """Two wave rectangles joined along a shared edge (L-shaped domain).

    The first body sends velocity and receives stress across the interface,
    the second the reverse, with the transmission pairing u1 = -y2,
    u2 = y1, i.e. coupling matrix [[0, I], [-I, 0]] on stacked port groups
    (velocities continuous, tractions balanced; exactly skew).

    Raises
    ------
    NonconformingInterface
        If the two interface spans disagree in face count or face length.
    """
    if params1 is None or params2 is None:
        params1, params2 = default_lshape_params(refine=refine, damping=damping)
    m1, len1 = _interface_faces(params1)
    m2, len2 = _interface_faces(params2)
    if m1 == 0 or m2 == 0:
        raise NonconformingInterface("both bodies need an interface edge")
    if m1 != m2:
        raise NonconformingInterface(f"interface face counts differ: {m1} vs {m2}")
    if abs(len1 - len2) > 1e-12 * (1.0 + abs(len1)):
        raise NonconformingInterface(f"interface face lengths differ: {len1} vs {len2}")

    node1 = build_wave2d_rect(params1)
    node2 = build_wave2d_rect(params2)
    node = compose_diagonal([node1, node2])
    eye = np.eye(m1)
    N_c = np.block([[np.zeros((m1, m1)), eye], [-eye, np.zeros((m1, m1))]])
    coupling = CouplingOperator(N_c)
    if x0 is None:
        x0 = np.concatenate([wave2d_default_state(params1), wave2d_default_state(params2)])
    return CoupledProblem(
        node=node,
        coupling=coupling,
        grid=grid,
        x0=x0,
        u_ext=_resolve_u_ext(grid, node.m_ext, u_ext),
    )


# ---------------------------------------------------------------------------
# Scalar demo
# ---------------------------------------------------------------------------


def scalar_demo_pole(a: float = -1.0) -> float:
    """Closed-loop pole of the scalar demo: x' = a*x + u with u = -x."""
    return a - 1.0


def build_scalar_demo(grid: TimeGrid, a: float = -1.0, x0: float = 1.0) -> CoupledProblem:
    """One scalar state fed back through the coupling y = -u.

    Node: x' = a*x + u, y = x, H = 1; coupling N_c = [-1].  The closed loop
    is x' = (a - 1)*x, whose midpoint discretization has the exact step
    ratio (1 + tau*p/2)/(1 - tau*p/2) with p = a - 1.
    """
    node = assemble_node(
        A=[[a]],
        B_ext=np.zeros((1, 0)),
        B_int=[[1.0]],
        C_ext=np.zeros((0, 1)),
        C_int=[[1.0]],
        D=None,
        H=[[1.0]],
    )
    coupling = CouplingOperator(np.array([[-1.0]]))
    return CoupledProblem(
        node=node,
        coupling=coupling,
        grid=grid,
        x0=np.array([float(x0)]),
        u_ext=GridTrajectory.zeros(grid, MIDPOINT, 0),
    )
