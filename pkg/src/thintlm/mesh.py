"""Structured 2D TLM mesh: storage, scatter, connect, boundaries and the time loop.

Port map (used everywhere in the package, 0-based array index in brackets)::

            port 3 [2]  (+y)
                 |
  port 2 [1] ----o---- port 4 [3]
    (-x)         |        (+x)
            port 1 [0]  (-y)

Port 4 of node (i, j) is joined to port 2 of node (i + 1, j); port 3 of node
(i, j) is joined to port 1 of node (i, j + 1).

Scattering matrices, with ``e`` the node excitation vector::

    shunt:  S = 1/2 e e^T - I,   e = (1, 1, 1, 1)
    series: S = I - 1/2 e e^T,   e = (1, 1, -1, -1)

Both are symmetric, orthogonal and involutive.  The node quantity
``U = 1/2 e^T V^i`` is the total node voltage of a shunt node and
``Z_TL`` times the loop current of a series node.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C0, Z0

P1, P2, P3, P4 = 0, 1, 2, 3


class NodeKind(enum.Enum):
    SERIES = "series"
    SHUNT = "shunt"

    @property
    def z_link(self) -> float:
        return Z0 / math.sqrt(2.0) if self is NodeKind.SERIES else math.sqrt(2.0) * Z0

    @property
    def excitation(self) -> np.ndarray:
        if self is NodeKind.SERIES:
            return np.array([1.0, 1.0, -1.0, -1.0])
        return np.ones(4)

    def scattering_matrix(self) -> np.ndarray:
        e = self.excitation
        outer = 0.5 * np.outer(e, e)
        if self is NodeKind.SERIES:
            return np.eye(4) - outer
        return outer - np.eye(4)


class BoundaryKind(enum.Enum):
    MATCHED = "matched"
    PEC = "pec"

    @property
    def reflection(self) -> float:
        return 0.0 if self is BoundaryKind.MATCHED else -1.0


class CrossingOnBoundary(ValueError):
    pass


EDGES = ("xmin", "xmax", "ymin", "ymax")


def time_step(dl: float) -> float:
    return dl / (math.sqrt(2.0) * C0)


@dataclass
class Mesh:
    """Uniform 2D TLM mesh of ``nx`` by ``ny`` nodes of one kind.

    ``boundaries`` maps each of ``xmin, xmax, ymin, ymax`` to a BoundaryKind
    (or a raw reflection coefficient, for experiments).  Node (i, j) sits at
    ``origin + (i + 1/2, j + 1/2) * dl``, so an outer boundary lies half a link
    beyond the edge nodes and a PEC-boxed ``nx`` by ``ny`` mesh is a cavity of
    ``nx * dl`` by ``ny * dl``.
    """

    nx: int
    ny: int
    dl: float
    kind: NodeKind = NodeKind.SHUNT
    boundaries: dict = field(default_factory=dict)
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"mesh needs at least 2x2 nodes, got {self.nx}x{self.ny}")
        if not self.dl > 0:
            raise ValueError("dl must be positive")
        self.kind = NodeKind(self.kind)
        bounds = {}
        for edge in EDGES:
            b = self.boundaries.get(edge, BoundaryKind.MATCHED)
            if isinstance(b, str):
                b = BoundaryKind(b)
            bounds[edge] = b
        unknown = set(self.boundaries) - set(EDGES)
        if unknown:
            raise ValueError(f"unknown boundary edges {sorted(unknown)}")
        self.boundaries = bounds
        self.vi = np.zeros((4, self.nx, self.ny))
        self.vr = np.zeros((4, self.nx, self.ny))
        self._e = self.kind.excitation
        self.crossings = None

    @property
    def dt(self) -> float:
        return time_step(self.dl)

    @property
    def z_link(self) -> float:
        return self.kind.z_link

    @property
    def y_link(self) -> float:
        return 1.0 / self.kind.z_link

    @property
    def v_link(self) -> float:
        return self.dl / self.dt

    def gamma(self, edge: str) -> float:
        b = self.boundaries[edge]
        return b.reflection if isinstance(b, BoundaryKind) else float(b)

    def node_position(self, i, j):
        x0, y0 = self.origin
        return x0 + (np.asarray(i) + 0.5) * self.dl, y0 + (np.asarray(j) + 0.5) * self.dl

    def node_index(self, x: float, y: float) -> tuple[int, int]:
        """Nearest node to the point (x, y); raises if it falls outside."""
        x0, y0 = self.origin
        i = int(math.floor((x - x0) / self.dl))
        j = int(math.floor((y - y0) / self.dl))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise ValueError(f"point ({x}, {y}) lies outside the mesh")
        return i, j

    def reset(self):
        self.vi[:] = 0.0
        self.vr[:] = 0.0
        if self.crossings is not None:
            self.crossings.reset()

    def attach(self, crossings) -> None:
        """Hand ownership of the links listed in ``crossings`` to the filter bank."""
        if crossings is None or len(crossings) == 0:
            self.crossings = None
            return
        orient = np.asarray(crossings.orientation)
        i = np.asarray(crossings.i)
        j = np.asarray(crossings.j)
        bad = (i < 0) | (j < 0) | (i >= self.nx) | (j >= self.ny)
        bad |= (orient == 0) & (i + 1 >= self.nx)
        bad |= (orient == 1) & (j + 1 >= self.ny)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise CrossingOnBoundary(
                f"crossing {k} at link ({i[k]}, {j[k]}, {'xy'[orient[k]]}) is not an interior link"
            )
        shape = self.vi.shape
        left_port = np.where(orient == 0, P4, P3)
        right_port = np.where(orient == 0, P2, P1)
        ri = np.where(orient == 0, i + 1, i)
        rj = np.where(orient == 0, j, j + 1)
        left = np.ravel_multi_index((left_port, i, j), shape)
        right = np.ravel_multi_index((right_port, ri, rj), shape)
        if len(np.unique(np.concatenate([left, right]))) != 2 * len(left):
            raise ValueError("a link is owned by more than one crossing")
        n = len(left)
        # crossing ports interleaved: 2c = left end, 2c + 1 = right end
        self._ports = np.empty(2 * n, dtype=np.int64)
        self._ports[0::2], self._ports[1::2] = left, right
        q = np.empty(2 * n, dtype=np.int64)
        q[0::2], q[1::2] = left_port, right_port
        pi = np.empty(2 * n, dtype=np.int64)
        pj = np.empty(2 * n, dtype=np.int64)
        pi[0::2], pi[1::2] = i, ri
        pj[0::2], pj[1::2] = j, rj
        self._port_q, self._port_i, self._port_j = q, pi, pj
        self._port_v = np.arange(2 * n) // 2 * 4 + np.where(np.arange(2 * n) % 2 == 0, 0, 3)
        self._lu = self._coupling_lu(crossings, q, pi * self.ny + pj)
        self.crossings = crossings

    def _coupling_lu(self, bank, q, node):
        """Factorize the joint stack / adjacent-node system solved every step.

        Unknowns are the stack voltages V (4 per crossing) followed by the
        waves R launched by the nodes into each crossing port.  Stack rows are
        ``G V - 2 y_TL R = -h``; node rows are ``R - S (V - R) = c`` over the
        crossing ports of the same node, ``c`` collecting the known incident
        waves.  Solving both together keeps the link delay at one step.
        """
        from scipy.sparse import coo_matrix
        from scipy.sparse.linalg import splu

        n = len(bank)
        nv = 4 * n
        rows, cols, vals = [], [], []
        c_idx, r_idx, k_idx = np.nonzero(np.ones((n, 4, 4), dtype=bool))
        g = bank.G[c_idx, r_idx, k_idx]
        keep = g != 0
        rows.append(4 * c_idx[keep] + r_idx[keep])
        cols.append(4 * c_idx[keep] + k_idx[keep])
        vals.append(g[keep])
        mask = bank.rhs_mask
        for end, col in ((0, 0), (1, 3)):
            cc = np.flatnonzero(mask[:, col])
            rows.append(4 * cc + col)
            cols.append(nv + 2 * cc + end)
            vals.append(np.full(len(cc), -2.0 * bank.y_link))
        S = self.kind.scattering_matrix()
        rows.append(nv + np.arange(2 * n))
        cols.append(nv + np.arange(2 * n))
        vals.append(np.ones(2 * n))
        order = np.argsort(node, kind="stable")
        bounds = np.flatnonzero(np.diff(node[order])) + 1
        for group in np.split(order, bounds):
            for p in group:
                for p2 in group:
                    s = S[q[p], q[p2]]
                    rows += [[nv + p], [nv + p]]
                    cols += [[self._port_v[p2]], [nv + p2]]
                    vals += [[-s], [s]]
        M = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(nv + 2 * n, nv + 2 * n)).tocsc()
        return splu(M)

    def _solve_crossings(self):
        bank = self.crossings
        vi_node = self.vi[:, self._port_i, self._port_j]
        e = self._e
        half_u = 0.5 * (e @ vi_node)
        own = vi_node[self._port_q, np.arange(vi_node.shape[1])]
        if self.kind is NodeKind.SHUNT:
            c = half_u - own
        else:
            c = own - e[self._port_q] * half_u
        rhs = np.concatenate([-bank.history().reshape(-1), c])
        z = self._lu.solve(rhs)
        nv = 4 * len(bank)
        V = z[:nv]
        flat_i = self.vi.reshape(-1)
        flat_i[self._ports] += V[self._port_v] - z[nv:]
        return V

    def scatter(self) -> None:
        V = self._solve_crossings() if self.crossings is not None else None
        e = self._e
        half_u = 0.5 * np.einsum("p,pij->ij", e, self.vi)
        if self.kind is NodeKind.SHUNT:
            np.subtract(half_u[None, :, :], self.vi, out=self.vr)
        else:
            np.subtract(self.vi, e[:, None, None] * half_u[None, :, :], out=self.vr)
        if V is not None:
            self.crossings.advance(V.reshape(-1, 4))

    def connect(self) -> None:
        vr = self.vr
        vi = np.empty_like(vr)
        vi[P4, :-1, :] = vr[P2, 1:, :]
        vi[P2, 1:, :] = vr[P4, :-1, :]
        vi[P3, :, :-1] = vr[P1, :, 1:]
        vi[P1, :, 1:] = vr[P3, :, :-1]
        vi[P2, 0, :] = self.gamma("xmin") * vr[P2, 0, :]
        vi[P4, -1, :] = self.gamma("xmax") * vr[P4, -1, :]
        vi[P1, :, 0] = self.gamma("ymin") * vr[P1, :, 0]
        vi[P3, :, -1] = self.gamma("ymax") * vr[P3, :, -1]
        if self.crossings is not None:
            # crossing-owned incident waves are solved at the next scatter
            vi.reshape(-1)[self._ports] = 0.0
        self.vi = vi

    def node_value(self) -> np.ndarray:
        """Node quantity U = 1/2 e^T V^i over the whole grid (volts)."""
        return 0.5 * np.einsum("p,pij->ij", self._e, self.vi)

    def field(self) -> np.ndarray:
        """E_z for a shunt mesh, H_z for a series mesh."""
        u = self.node_value()
        if self.kind is NodeKind.SHUNT:
            return -u / self.dl
        return u / (self.z_link * self.dl)

    def energy(self) -> float:
        return float(np.sum(self.vi**2))


@dataclass
class ProbeRecords:
    records: dict
    dl: float
    dt: float
    n_steps: int

    def __getitem__(self, name):
        return self.records[name]


def run(mesh: Mesh, crossings=None, sources=(), probes=(), n_steps: int = 1,
        reset: bool = True, on_step=None) -> ProbeRecords:
    """Run ``n_steps`` of inject, scatter, record, connect."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if crossings is not None:
        mesh.attach(crossings)
    if reset:
        mesh.reset()
    for p in probes:
        p.start(mesh, n_steps)
    for n in range(n_steps):
        for s in sources:
            s.inject(mesh, n)
        mesh.scatter()
        for p in probes:
            p.record(mesh, n)
        if on_step is not None:
            on_step(mesh, n)
        mesh.connect()
    return ProbeRecords({p.name: p.samples for p in probes}, mesh.dl, mesh.dt, n_steps)
