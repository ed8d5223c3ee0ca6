"""Globally continuous piecewise quadratic and piecewise constant reconstruction.

The quadratic reconstruction is tensor-product Q2 Lagrange interpolation on
the 3x3 Simpson nodes of every cell.  The eight boundary nodes are the
shared point values in primitive variables; the ninth (center) node is
pinned by inverting Simpson's rule on the conservative cell average.  By
sharing boundary nodes between neighbouring cells the reconstruction is
continuous across every interior edge.
"""

from dataclasses import dataclass

import numpy as np

from . import state as st
from .errors import OutOfDomain

# points closer to a face than this (in cell units) count as on-face
FACE_TOL = 1e-12


def locate_cell(grid, x, y):
    """Cell index of (x, y) in the grid-plus-ghost extent.

    Points exactly on a cell face belong to the lower-index cell.
    """
    tx = (np.asarray(x) - grid.xlo_ext) / grid.dx
    ty = (np.asarray(y) - grid.ylo_ext) / grid.dy
    if np.any(tx < 0) or np.any(tx > grid.NX) or np.any(ty < 0) or np.any(ty > grid.NY):
        raise OutOfDomain("point outside the grid-plus-ghost extent")
    I = np.clip(np.ceil(tx).astype(np.int64) - 1, 0, grid.NX - 1)
    J = np.clip(np.ceil(ty).astype(np.int64) - 1, 0, grid.NY - 1)
    return I, J


def _lagrange_q2(xi):
    """1D quadratic Lagrange basis at nodes xi = -1, 0, 1."""
    return (
        0.5 * xi * (xi - 1.0),
        1.0 - xi * xi,
        0.5 * xi * (xi + 1.0),
    )


@dataclass
class Reconstruction:
    """Primitive-variable reconstruction over the whole (extended) grid.

    kind "cpq": continuous piecewise quadratic from all degrees of freedom.
    kind "pc":  piecewise constant from primitive cell averages.

    vert/xedge/yedge/center are primitive node arrays shaped like the
    corresponding point-value arrays; pavg are primitive cell averages.
    """

    grid: object
    kind: str
    pavg: np.ndarray
    vert: np.ndarray = None
    xedge: np.ndarray = None
    yedge: np.ndarray = None
    center: np.ndarray = None

    def eval(self, x, y):
        """Evaluate the reconstruction; broadcasts over coordinate arrays."""
        g = self.grid
        I, J = locate_cell(g, x, y)
        if self.kind == "pc":
            # points on an interior face take the mean of the adjacent
            # cells so the evaluation has no directional bias
            tx = (np.asarray(x, dtype=float) - g.xlo_ext) / g.dx
            ty = (np.asarray(y, dtype=float) - g.ylo_ext) / g.dy
            kx = np.rint(tx)
            ky = np.rint(ty)
            onx = (np.abs(tx - kx) <= FACE_TOL) & (kx > 0) & (kx < g.NX)
            ony = (np.abs(ty - ky) <= FACE_TOL) & (ky > 0) & (ky < g.NY)
            Ilo = np.where(onx, kx.astype(np.int64) - 1, I)
            Ihi = np.where(onx, kx.astype(np.int64), I)
            Jlo = np.where(ony, ky.astype(np.int64) - 1, J)
            Jhi = np.where(ony, ky.astype(np.int64), J)
            return 0.25 * (
                self.pavg[Ilo, Jlo] + self.pavg[Ihi, Jlo]
                + self.pavg[Ilo, Jhi] + self.pavg[Ihi, Jhi]
            )
        xi = (np.asarray(x) - (g.x0 + (I - g.ng + 0.5) * g.dx)) / (0.5 * g.dx)
        eta = (np.asarray(y) - (g.y0 + (J - g.ng + 0.5) * g.dy)) / (0.5 * g.dy)
        Nx = _lagrange_q2(xi)
        Ny = _lagrange_q2(eta)
        nodes = (
            (self.vert[I, J], self.xedge[I, J], self.vert[I, J + 1]),
            (self.yedge[I, J], self.center[I, J], self.yedge[I, J + 1]),
            (self.vert[I + 1, J], self.xedge[I + 1, J], self.vert[I + 1, J + 1]),
        )
        out = 0.0
        for a in range(3):
            for b in range(3):
                out = out + (Nx[a] * Ny[b])[..., None] * nodes[a][b]
        return out


def build_cpq(s: st.GridState, gamma=st.GAMMA):
    """Build the continuous piecewise quadratic reconstruction at time s.t."""
    vert = st.cons_to_prim(s.pvv, gamma)
    xedge = st.cons_to_prim(s.pvx, gamma)
    yedge = st.cons_to_prim(s.pvy, gamma)
    center = st.cons_to_prim(st.centers_from_state(s), gamma)
    pavg = st.simpson_cell_average(vert, xedge, yedge, center)
    return Reconstruction(s.grid, "cpq", pavg, vert, xedge, yedge, center)


def build_pc(s: st.GridState, gamma=st.GAMMA):
    """Piecewise constant reconstruction from primitive cell averages."""
    return Reconstruction(s.grid, "pc", st.primitive_averages(s, gamma))


def as_pc(rec: Reconstruction):
    """Piecewise constant view sharing the primitive averages of ``rec``."""
    return Reconstruction(rec.grid, "pc", rec.pavg)
