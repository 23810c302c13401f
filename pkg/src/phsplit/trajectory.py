"""Uniform time grids, sampled trajectories, and weighted L2/sup norms.

States are sampled at the grid nodes ``t_j = j*tau``; port signals and
operator residuals live at the midpoints ``t_{j+1/2}``.  The only sanctioned
conversion between the two samplings is the two-point average
``(x_j + x_{j+1})/2``, which is what every quadrature here uses.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParams,
    DimensionMismatch,
    GridMismatch,
    NegativeOmega,
    SamplingMismatch,
)

__all__ = [
    "TimeGrid",
    "GridTrajectory",
    "TrajPair",
    "l2_inner",
    "l2_norm",
    "weighted_norm",
    "sup_norm",
    "lincomb",
    "to_midpoints",
    "write_csv",
    "read_csv",
]

NODE = "node"
MIDPOINT = "midpoint"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, T] with N_t steps of size tau = T/N_t."""

    T: float
    N_t: int

    def __post_init__(self):
        if not (self.T > 0.0):
            raise BadParams(f"final time must be positive, got {self.T}")
        if self.N_t < 1:
            raise BadParams(f"need at least one step, got N_t={self.N_t}")

    @property
    def tau(self) -> float:
        return self.T / self.N_t

    @property
    def node_times(self) -> np.ndarray:
        """Times t_j = j*tau, j = 0..N_t (length N_t + 1)."""
        return np.arange(self.N_t + 1) * self.tau

    @property
    def midpoint_times(self) -> np.ndarray:
        """Times t_{j+1/2} = (j + 1/2)*tau, j = 0..N_t-1 (length N_t)."""
        return (np.arange(self.N_t) + 0.5) * self.tau

    def rows(self, sampling: str) -> int:
        return self.N_t + 1 if sampling == NODE else self.N_t


def _check_sampling(sampling: str) -> str:
    if sampling not in (NODE, MIDPOINT):
        raise SamplingMismatch(f"sampling must be 'node' or 'midpoint', got {sampling!r}")
    return sampling


@dataclass(frozen=True, eq=False)
class GridTrajectory:
    """Vector-valued samples on a :class:`TimeGrid`.

    ``values`` has shape ``(N_t + 1, dim)`` for node sampling and
    ``(N_t, dim)`` for midpoint sampling.  ``dim = 0`` is allowed (empty
    port signals).
    """

    grid: TimeGrid
    sampling: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_sampling(self.sampling)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise DimensionMismatch(f"values must be 2-d (rows, dim), got shape {vals.shape}")
        want = self.grid.rows(self.sampling)
        if vals.shape[0] != want:
            raise DimensionMismatch(
                f"{self.sampling} trajectory needs {want} rows, got {vals.shape[0]}"
            )
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.node_times if self.sampling == NODE else self.grid.midpoint_times

    @classmethod
    def zeros(cls, grid: TimeGrid, sampling: str, dim: int) -> "GridTrajectory":
        _check_sampling(sampling)
        return cls(grid, sampling, np.zeros((grid.rows(sampling), dim)))

    @classmethod
    def from_callable(cls, grid: TimeGrid, sampling: str, dim: int, fn) -> "GridTrajectory":
        """Sample ``fn(t) -> array of length dim`` at the grid times."""
        _check_sampling(sampling)
        ts = grid.node_times if sampling == NODE else grid.midpoint_times
        vals = np.array([np.broadcast_to(np.asarray(fn(t), dtype=float), (dim,)) for t in ts])
        return cls(grid, sampling, vals.reshape(len(ts), dim))

    def copy(self) -> "GridTrajectory":
        return GridTrajectory(self.grid, self.sampling, self.values.copy())


@dataclass(frozen=True, eq=False)
class TrajPair:
    """State/internal-port pair: node-sampled x and midpoint-sampled u."""

    x: GridTrajectory
    u: GridTrajectory

    def __post_init__(self):
        if self.x.grid != self.u.grid:
            raise GridMismatch("state and port trajectories live on different grids")
        if self.x.sampling != NODE:
            raise SamplingMismatch("pair state must be node-sampled")
        if self.u.sampling != MIDPOINT:
            raise SamplingMismatch("pair port signal must be midpoint-sampled")

    @property
    def grid(self) -> TimeGrid:
        return self.x.grid

    def copy(self) -> "TrajPair":
        return TrajPair(self.x.copy(), self.u.copy())


def to_midpoints(a: GridTrajectory) -> np.ndarray:
    """Midpoint-sampled values of ``a`` (two-point average for node sampling)."""
    if a.sampling == MIDPOINT:
        return a.values
    return 0.5 * (a.values[:-1] + a.values[1:])


def _common_grid(a: GridTrajectory, b: GridTrajectory) -> TimeGrid:
    if a.grid != b.grid:
        raise GridMismatch("trajectories live on different grids")
    return a.grid


def _apply_weight(vals: np.ndarray, weight) -> np.ndarray:
    if weight is None:
        return vals
    W = np.asarray(weight, dtype=float)
    if W.shape != (vals.shape[1], vals.shape[1]):
        raise DimensionMismatch(
            f"weight shape {W.shape} incompatible with dimension {vals.shape[1]}"
        )
    return vals @ W.T


def l2_inner(a: GridTrajectory, b: GridTrajectory, weight=None) -> float:
    """Midpoint-rule L2 inner product tau * sum_j <a_{j+1/2}, W b_{j+1/2}>.

    Node-sampled inputs are first averaged to midpoints.  ``weight`` is an
    optional symmetric matrix applied to the second argument.
    """
    grid = _common_grid(a, b)
    av, bv = to_midpoints(a), to_midpoints(b)
    if av.shape[1] != bv.shape[1]:
        raise DimensionMismatch(f"dimensions differ: {av.shape[1]} vs {bv.shape[1]}")
    return grid.tau * float(np.sum(av * _apply_weight(bv, weight)))


def l2_norm(a: GridTrajectory, weight=None) -> float:
    """Plain (unweighted-in-time) L2 norm, midpoint rule."""
    return weighted_norm(a, 0.0, weight)


def weighted_norm(a: GridTrajectory, omega: float, weight=None) -> float:
    """Exponentially weighted L2 norm with weights exp(-2 t_{j+1/2} omega).

    ``omega = 0`` reduces to the plain norm.  Raises
    :class:`~phsplit.errors.NegativeOmega` for ``omega < 0``.
    """
    if omega < 0.0:
        raise NegativeOmega(f"omega must be >= 0, got {omega}")
    av = to_midpoints(a)
    ts = a.grid.midpoint_times
    rho = np.exp(-2.0 * omega * ts)
    quad = np.sum(av * _apply_weight(av, weight), axis=1)
    return float(np.sqrt(max(a.grid.tau * float(np.dot(rho, quad)), 0.0)))


def sup_norm(x: GridTrajectory, weight=None) -> float:
    """max_j ||x_j||_W over the grid nodes; node-sampled input required."""
    if x.sampling != NODE:
        raise SamplingMismatch("sup norm is defined on node-sampled trajectories")
    quad = np.sum(x.values * _apply_weight(x.values, weight), axis=1)
    if quad.size == 0:
        return 0.0
    return float(np.sqrt(max(float(np.max(quad)), 0.0)))


def lincomb(alpha: float, a: GridTrajectory, beta: float, b: GridTrajectory) -> GridTrajectory:
    """alpha*a + beta*b on the common grid and sampling."""
    _common_grid(a, b)
    if a.sampling != b.sampling:
        raise SamplingMismatch("cannot combine node- and midpoint-sampled trajectories")
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    return GridTrajectory(a.grid, a.sampling, alpha * a.values + beta * b.values)


def write_csv(traj: GridTrajectory, path_or_file) -> None:
    """Write ``t,v0,...,v{dim-1}`` rows with 17 significant digits."""
    header = ",".join(["t"] + [f"v{i}" for i in range(traj.dim)])
    lines = [header]
    for t, row in zip(traj.times, traj.values):
        lines.append(",".join(f"{v:.17g}" for v in np.concatenate(([t], row))))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_csv(grid: TimeGrid, sampling: str, path_or_file) -> GridTrajectory:
    """Read a trajectory written by :func:`write_csv` back onto ``grid``."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    rows = [line.split(",") for line in text.strip().splitlines()]
    if len(rows) < 2:
        raise GridMismatch("CSV has no data rows")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    vals = data[:, 1:]
    traj = GridTrajectory(grid, sampling, vals)
    if not np.allclose(data[:, 0], traj.times, rtol=0.0, atol=1e-12 * (1.0 + grid.T)):
        raise GridMismatch("time column does not match the target grid")
    return traj


def _csv_text(traj: GridTrajectory) -> str:
    buf = io.StringIO()
    write_csv(traj, buf)
    return buf.getvalue()
