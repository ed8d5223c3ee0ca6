"""Grid, degrees of freedom, variable conversions and ghost-cell filling.

The solver stores conservative cell averages together with conservative
point values at cell vertices and at the midpoints of cell edges.  Point
values are stored once per geometric location, so the global continuity of
the reconstruction is structural.  All field arrays carry the component
axis last with the ordering (rho, rho*u, rho*v, E) for conservative data
and (rho, u, v, p) for primitive data.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    InconsistentPeriodicity,
    NonPositiveDensity,
    NonPositivePressure,
)

GAMMA = 1.4
DEFAULT_FLOOR = 1e-12

# Simpson weights on the 3x3 cell nodes: corners 1, edge midpoints 4,
# center 16, total 36.
SIMPSON_CORNER = 1.0 / 36.0
SIMPSON_EDGE = 4.0 / 36.0
SIMPSON_CENTER = 16.0 / 36.0


@dataclass(frozen=True)
class PrimState:
    """Pointwise primitive state (rho, u, v, p)."""

    rho: float
    u: float
    v: float
    p: float

    def as_array(self):
        return np.array([self.rho, self.u, self.v, self.p])

    def sound_speed(self, gamma=GAMMA):
        return np.sqrt(gamma * self.p / self.rho)


@dataclass(frozen=True)
class ConsState:
    """Pointwise conservative state (rho, rho*u, rho*v, E)."""

    rho: float
    mx: float
    my: float
    E: float

    def as_array(self):
        return np.array([self.rho, self.mx, self.my, self.E])


def prim_to_cons(w, gamma=GAMMA):
    """Convert primitive (rho,u,v,p) to conservative (rho,mx,my,E).

    Works on any array with the component axis last, or on PrimState.
    """
    if isinstance(w, PrimState):
        return ConsState(*prim_to_cons(w.as_array(), gamma))
    w = np.asarray(w, dtype=np.float64)
    q = np.empty_like(w)
    rho = w[..., 0]
    q[..., 0] = rho
    q[..., 1] = rho * w[..., 1]
    q[..., 2] = rho * w[..., 2]
    q[..., 3] = w[..., 3] / (gamma - 1.0) + 0.5 * rho * (
        w[..., 1] ** 2 + w[..., 2] ** 2
    )
    return q


def cons_to_prim(q, gamma=GAMMA, check=True, floor=0.0):
    """Convert conservative variables to primitive ones.

    With ``check=True`` a non-positive density raises NonPositiveDensity;
    the pressure is not checked here because callers routinely need to
    inspect candidate values (the limiter cascade does exactly that).
    """
    if isinstance(q, ConsState):
        return PrimState(*cons_to_prim(q.as_array(), gamma, check, floor))
    q = np.asarray(q, dtype=np.float64)
    rho = q[..., 0]
    if check and np.any(rho <= floor):
        raise NonPositiveDensity(
            "density <= %g in conservative-to-primitive conversion" % floor
        )
    w = np.empty_like(q)
    w[..., 0] = rho
    w[..., 1] = q[..., 1] / rho
    w[..., 2] = q[..., 2] / rho
    w[..., 3] = (gamma - 1.0) * (
        q[..., 3] - 0.5 * (q[..., 1] ** 2 + q[..., 2] ** 2) / rho
    )
    return w


def sound_speed(w, gamma=GAMMA):
    return np.sqrt(gamma * w[..., 3] / w[..., 0])


def is_admissible(w, floor=DEFAULT_FLOOR):
    """Elementwise admissibility of primitive states: rho > floor, p > floor."""
    w = np.asarray(w)
    return (w[..., 0] > floor) & (w[..., 3] > floor)


@dataclass(frozen=True)
class Grid:
    """Cartesian grid with ghost layers.

    Interior cells carry indices ng..ng+nx-1 along x (same along y).
    Vertex ``I`` sits at ``x0 + (I - ng)*dx``.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0
    ng: int = 2

    def __post_init__(self):
        if self.dx <= 0 or self.dy <= 0 or self.ng < 2:
            raise ValueError("need dx, dy > 0 and ng >= 2")

    @property
    def NX(self):
        return self.nx + 2 * self.ng

    @property
    def NY(self):
        return self.ny + 2 * self.ng

    # coordinates covering the grid including ghosts
    def xv(self):
        """Vertex x-coordinates, length NX+1."""
        return self.x0 + (np.arange(self.NX + 1) - self.ng) * self.dx

    def yv(self):
        return self.y0 + (np.arange(self.NY + 1) - self.ng) * self.dy

    def xc(self):
        """Cell-center x-coordinates, length NX."""
        return self.x0 + (np.arange(self.NX) - self.ng + 0.5) * self.dx

    def yc(self):
        return self.y0 + (np.arange(self.NY) - self.ng + 0.5) * self.dy

    @property
    def xlo_ext(self):
        return self.x0 - self.ng * self.dx

    @property
    def ylo_ext(self):
        return self.y0 - self.ng * self.dy

    @property
    def xhi_ext(self):
        return self.x0 + (self.nx + self.ng) * self.dx

    @property
    def yhi_ext(self):
        return self.y0 + (self.ny + self.ng) * self.dy

    def interior(self, arr):
        """View of the interior cells of a cell-indexed array."""
        ng = self.ng
        return arr[ng : ng + self.nx, ng : ng + self.ny]


@dataclass
class GridState:
    """All degrees of freedom at one time level.

    avg : (NX, NY, 4)      conservative cell averages
    pvv : (NX+1, NY+1, 4)  conservative point values at vertices
    pvx : (NX+1, NY, 4)    midpoints of vertical edges, (x_{i-1/2}, y_j)
    pvy : (NX, NY+1, 4)    midpoints of horizontal edges, (x_i, y_{j-1/2})
    """

    grid: Grid
    t: float = 0.0
    avg: np.ndarray = None
    pvv: np.ndarray = None
    pvx: np.ndarray = None
    pvy: np.ndarray = None

    def __post_init__(self):
        g = self.grid
        if self.avg is None:
            self.avg = np.zeros((g.NX, g.NY, 4))
        if self.pvv is None:
            self.pvv = np.zeros((g.NX + 1, g.NY + 1, 4))
        if self.pvx is None:
            self.pvx = np.zeros((g.NX + 1, g.NY, 4))
        if self.pvy is None:
            self.pvy = np.zeros((g.NX, g.NY + 1, 4))

    def copy(self):
        return GridState(
            self.grid,
            self.t,
            self.avg.copy(),
            self.pvv.copy(),
            self.pvx.copy(),
            self.pvy.copy(),
        )


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition per side.

    Each side is "periodic", "outflow", "wall", or "inflow".  Inflow sides
    need an evaluator ``inflow(x, y) -> (..., 4)`` returning primitive
    states (broadcasting over coordinate arrays).
    """

    left: str = "periodic"
    right: str = "periodic"
    bottom: str = "periodic"
    top: str = "periodic"
    inflow: Optional[Callable] = None

    def __post_init__(self):
        if (self.left == "periodic") != (self.right == "periodic"):
            raise InconsistentPeriodicity("left/right must both be periodic")
        if (self.bottom == "periodic") != (self.top == "periodic"):
            raise InconsistentPeriodicity("bottom/top must both be periodic")
        for side in (self.left, self.right, self.bottom, self.top):
            if side not in ("periodic", "outflow", "wall", "inflow"):
                raise ValueError("unknown boundary tag %r" % side)
            if side == "inflow" and self.inflow is None:
                raise ValueError("inflow side needs an inflow evaluator")


def average_from_nodes(nodes):
    """Simpson 3x3 average; ``nodes`` has shape (3, 3, ..., 4), x index first."""
    nodes = np.asarray(nodes)
    w1d = np.array([1.0, 4.0, 1.0]) / 6.0
    return np.einsum("a,b,ab...->...", w1d, w1d, nodes)


def center_from_average(avg, corners, edges):
    """Invert Simpson's rule for the center node.

    corners: the four vertex values, shape (4, ..., 4); edges: the four
    edge-midpoint values, shape (4, ..., 4).
    """
    avg = np.asarray(avg)
    csum = np.sum(np.asarray(corners), axis=0)
    esum = np.sum(np.asarray(edges), axis=0)
    return (36.0 * avg - csum - 4.0 * esum) / 16.0


def centers_from_state(s: GridState):
    """Conservative center point values for every cell (ghosts included)."""
    pvv, pvx, pvy = s.pvv, s.pvx, s.pvy
    csum = pvv[:-1, :-1] + pvv[1:, :-1] + pvv[:-1, 1:] + pvv[1:, 1:]
    esum = pvx[:-1, :] + pvx[1:, :] + pvy[:, :-1] + pvy[:, 1:]
    return (36.0 * s.avg - csum - 4.0 * esum) / 16.0


def simpson_cell_average(vert, xedge, yedge, center):
    """Simpson 3x3 rule from global node arrays, for every cell."""
    csum = vert[:-1, :-1] + vert[1:, :-1] + vert[:-1, 1:] + vert[1:, 1:]
    esum = xedge[:-1, :] + xedge[1:, :] + yedge[:, :-1] + yedge[:, 1:]
    return SIMPSON_CORNER * csum + SIMPSON_EDGE * esum + SIMPSON_CENTER * center


def primitive_averages(s: GridState, gamma=GAMMA):
    """Third-order cell averages in primitive variables.

    The center point value is recovered by inverting Simpson's rule in
    conservative variables; the 9 nodes are converted to primitive
    variables and averaged with Simpson's rule.
    """
    try:
        wv = cons_to_prim(s.pvv, gamma)
        wx = cons_to_prim(s.pvx, gamma)
        wy = cons_to_prim(s.pvy, gamma)
        wc = cons_to_prim(centers_from_state(s), gamma)
    except NonPositiveDensity as exc:
        raise NonPositiveDensity("while averaging point values: %s" % exc)
    pa = simpson_cell_average(wv, wx, wy, wc)
    if np.any(pa[..., 0] <= 0.0):
        raise NonPositiveDensity("primitive cell average with rho <= 0")
    if np.any(pa[..., 3] <= 0.0):
        raise NonPositivePressure("primitive cell average with p <= 0")
    return pa


def _mirror_cons(q, axis):
    """Mirror a conservative state across a wall normal to ``axis``."""
    out = q.copy()
    out[..., 1 + axis] = -out[..., 1 + axis]
    return out


def _inflow_cell_averages(grid, f, Isel, Jsel):
    """Simpson average of the prescribed inflow field over selected cells."""
    xc = grid.xc()[Isel]
    yc = grid.yc()[Jsel]
    offx = np.array([-0.5 * grid.dx, 0.0, 0.5 * grid.dx])
    offy = np.array([-0.5 * grid.dy, 0.0, 0.5 * grid.dy])
    X = xc[:, None, None, None] + offx[None, None, :, None]
    Y = yc[None, :, None, None] + offy[None, None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    w = f(X, Y)
    q = prim_to_cons(w)
    nodes = np.moveaxis(q, (2, 3), (0, 1))
    return average_from_nodes(nodes)


def fill_ghosts(s: GridState, bc: BoundarySpec, gamma=GAMMA):
    """Fill ghost cell averages and ghost point values in place.

    The x-direction sides are filled first over the full y-extent, then
    the y-direction sides over the full x-extent, so corner blocks are
    composed from already-filled columns.  Points on a wall line itself
    are evolved by the scheme and never overwritten here.
    """
    g = s.grid
    ng, nx, ny = g.ng, g.nx, g.ny

    def fill_x(side):
        tag = bc.left if side == "lo" else bc.right
        if tag == "periodic":
            # canonical interior vertex columns are ng..ng+nx-1; the high
            # boundary column ng+nx is filled from ng for exact equality
            for arr, n in ((s.pvv, nx), (s.pvx, nx)):
                arr[:ng] = arr[nx : nx + ng]
                arr[ng + nx :] = arr[ng : ng + arr.shape[0] - nx - ng]
            for arr in (s.avg, s.pvy):
                arr[:ng] = arr[nx : nx + ng]
                arr[ng + nx :] = arr[ng : 2 * ng]
            return
        if tag == "outflow":
            if side == "lo":
                s.avg[:ng] = s.avg[ng]
                s.pvy[:ng] = s.pvy[ng]
                s.pvv[:ng] = s.pvv[ng]
                s.pvx[:ng] = s.pvx[ng]
            else:
                s.avg[ng + nx :] = s.avg[ng + nx - 1]
                s.pvy[ng + nx :] = s.pvy[ng + nx - 1]
                s.pvv[ng + nx + 1 :] = s.pvv[ng + nx]
                s.pvx[ng + nx + 1 :] = s.pvx[ng + nx]
        elif tag == "wall":
            if side == "lo":
                for I in range(ng):
                    s.avg[I] = _mirror_cons(s.avg[2 * ng - 1 - I], 0)
                    s.pvy[I] = _mirror_cons(s.pvy[2 * ng - 1 - I], 0)
                for I in range(ng):
                    s.pvv[I] = _mirror_cons(s.pvv[2 * ng - I], 0)
                    s.pvx[I] = _mirror_cons(s.pvx[2 * ng - I], 0)
            else:
                ce = ng + nx  # wall vertex column
                for k in range(1, ng + 1):
                    s.avg[ce - 1 + k] = _mirror_cons(s.avg[ce - k], 0)
                    s.pvy[ce - 1 + k] = _mirror_cons(s.pvy[ce - k], 0)
                    s.pvv[ce + k] = _mirror_cons(s.pvv[ce - k], 0)
                    s.pvx[ce + k] = _mirror_cons(s.pvx[ce - k], 0)
        elif tag == "inflow":
            xv, yv = g.xv(), g.yv()
            xc, yc = g.xc(), g.yc()
            if side == "lo":
                Icells = np.arange(ng)
                Ipts = np.arange(ng)
            else:
                Icells = np.arange(ng + nx, g.NX)
                Ipts = np.arange(ng + nx + 1, g.NX + 1)
            s.avg[Icells] = _inflow_cell_averages(g, bc.inflow, Icells, np.arange(g.NY))
            s.pvv[Ipts] = prim_to_cons(
                bc.inflow(xv[Ipts][:, None], yv[None, :]), gamma
            )
            s.pvx[Ipts] = prim_to_cons(
                bc.inflow(xv[Ipts][:, None], yc[None, :]), gamma
            )
            s.pvy[Icells] = prim_to_cons(
                bc.inflow(xc[Icells][:, None], yv[None, :]), gamma
            )

    def fill_y(side):
        tag = bc.bottom if side == "lo" else bc.top
        if tag == "periodic":
            for arr in (s.pvv, s.pvy):
                arr[:, :ng] = arr[:, ny : ny + ng]
                arr[:, ng + ny :] = arr[:, ng : ng + arr.shape[1] - ny - ng]
            for arr in (s.avg, s.pvx):
                arr[:, :ng] = arr[:, ny : ny + ng]
                arr[:, ng + ny :] = arr[:, ng : 2 * ng]
            return
        if tag == "outflow":
            if side == "lo":
                s.avg[:, :ng] = s.avg[:, ng : ng + 1]
                s.pvx[:, :ng] = s.pvx[:, ng : ng + 1]
                s.pvv[:, :ng] = s.pvv[:, ng : ng + 1]
                s.pvy[:, :ng] = s.pvy[:, ng : ng + 1]
            else:
                s.avg[:, ng + ny :] = s.avg[:, ng + ny - 1 : ng + ny]
                s.pvx[:, ng + ny :] = s.pvx[:, ng + ny - 1 : ng + ny]
                s.pvv[:, ng + ny + 1 :] = s.pvv[:, ng + ny : ng + ny + 1]
                s.pvy[:, ng + ny + 1 :] = s.pvy[:, ng + ny : ng + ny + 1]
        elif tag == "wall":
            if side == "lo":
                for J in range(ng):
                    s.avg[:, J] = _mirror_cons(s.avg[:, 2 * ng - 1 - J], 1)
                    s.pvx[:, J] = _mirror_cons(s.pvx[:, 2 * ng - 1 - J], 1)
                    s.pvv[:, J] = _mirror_cons(s.pvv[:, 2 * ng - J], 1)
                    s.pvy[:, J] = _mirror_cons(s.pvy[:, 2 * ng - J], 1)
            else:
                ce = ng + ny
                for k in range(1, ng + 1):
                    s.avg[:, ce - 1 + k] = _mirror_cons(s.avg[:, ce - k], 1)
                    s.pvx[:, ce - 1 + k] = _mirror_cons(s.pvx[:, ce - k], 1)
                    s.pvv[:, ce + k] = _mirror_cons(s.pvv[:, ce - k], 1)
                    s.pvy[:, ce + k] = _mirror_cons(s.pvy[:, ce - k], 1)
        elif tag == "inflow":
            xv, yv = g.xv(), g.yv()
            xc, yc = g.xc(), g.yc()
            if side == "lo":
                Jcells = np.arange(ng)
                Jpts = np.arange(ng)
            else:
                Jcells = np.arange(ng + ny, g.NY)
                Jpts = np.arange(ng + ny + 1, g.NY + 1)
            s.avg[:, Jcells] = _inflow_cell_averages(
                g, bc.inflow, np.arange(g.NX), Jcells
            )
            s.pvv[:, Jpts] = prim_to_cons(
                bc.inflow(xv[:, None], yv[Jpts][None, :]), gamma
            )
            s.pvy[:, Jpts] = prim_to_cons(
                bc.inflow(xc[:, None], yv[Jpts][None, :]), gamma
            )
            s.pvx[:, Jcells] = prim_to_cons(
                bc.inflow(xv[:, None], yc[Jcells][None, :]), gamma
            )

    fill_x("lo")
    fill_x("hi")
    fill_y("lo")
    fill_y("hi")
    return s
