"""Catalog of test problems: initial data, boundaries, reference errors.

One-dimensional profiles run on 2D grids with 8 cells in the
y-direction and periodic y-boundaries.  Discontinuous data are sampled
pointwise; points exactly on an interface take the printed interface
state where one is given, otherwise the lower-index side.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import state as st
from .errors import GridMismatch, UnknownProblem

GAMMA = st.GAMMA


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    xlim: tuple
    ylim: tuple
    tend: float
    bc: st.BoundarySpec
    init: Callable  # (x, y) -> primitive (..., 4), broadcasting
    reference: str = "fine_grid"  # "self_at_integer_times" | "fine_grid" | "none"
    default_nx: int = 128
    default_ny: Optional[int] = None  # None: square cells

    def grid(self, nx, ny=None, ng=2):
        if ny is None:
            ny = self.default_ny
        Lx = self.xlim[1] - self.xlim[0]
        Ly = self.ylim[1] - self.ylim[0]
        if ny is None:
            ny = max(4, int(round(nx * Ly / Lx)))
        return st.Grid(nx, ny, Lx / nx, Ly / ny, self.xlim[0], self.ylim[0], ng)


def _stackw(rho, u, v, p):
    return np.stack(np.broadcast_arrays(rho, u, v, p), axis=-1)


def _ex1(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    rho = 1.0 + 0.5 * np.exp(-80.0 * (x - 0.5) ** 2)
    z = np.zeros_like(x)
    return _stackw(rho, z, z, rho.copy())


# vortex pressure profile: antiderivative of rho(r) * u_phi(r)^2 / r for
# u_phi = 1024 (1-r)^6 r^6, written out as a degree-36 polynomial
_VORTEX_P_COEFFS = (
    (36, 1.0 / 72), (35, -6.0 / 35), (34, 15.0 / 17), (33, -74.0 / 33),
    (32, 57.0 / 32), (31, 174.0 / 31), (30, -269.0 / 15), (29, 450.0 / 29),
    (28, 153.0 / 8), (27, -1564.0 / 27), (26, 510.0 / 13), (25, 204.0 / 5),
    (24, -1473.0 / 16), (23, 1014.0 / 23), (22, 1053.0 / 22), (21, -558.0 / 7),
    (20, 783.0 / 20), (19, 54.0 / 19), (18, -38.0 / 9), (17, -222.0 / 17),
    (16, 609.0 / 32), (15, -184.0 / 15), (14, 4.5), (13, -12.0 / 13),
    (12, 1.0 / 12),
)
_VORTEX_CENTER_STATE = np.array([0.5, 1.0, 1.0, 0.1])
_VORTEX_R = 0.4


def _vortex_pr(r):
    out = np.zeros_like(r)
    for k, c in _VORTEX_P_COEFFS:
        out += c * r**k
    return 1024.0**2 * out


_VORTEX_P1 = float(_vortex_pr(np.array(1.0)))


def _vortex(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    rc, uc, vc, pc = _VORTEX_CENTER_STATE
    dx_, dy_ = x - 0.5, y - 0.5
    r = np.sqrt(dx_**2 + dy_**2) / _VORTEX_R
    inside = r < 1.0
    theta = np.arctan2(dy_, dx_)
    uphi = 1024.0 * (1.0 - r) ** 6 * r**6
    rho = np.where(inside, rc + 0.5 * (1.0 - r**2) ** 6, rc)
    u = np.where(inside, uc - np.sin(theta) * uphi, uc)
    v = np.where(inside, vc + np.cos(theta) * uphi, vc)
    p = np.where(inside, pc + (_vortex_pr(np.minimum(r, 1.0)) - _VORTEX_P1), pc)
    return _stackw(rho, u, v, p)


def _piecewise_x(xsplit, left, mid, right):
    left, mid, right = (np.asarray(s, float) for s in (left, mid, right))

    def init(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.where(
            (x < xsplit)[..., None],
            left,
            np.where((x > xsplit)[..., None], right, mid),
        )
        return np.broadcast_to(out, x.shape + (4,)).copy()

    return init


def _quadrants(states, center=(0.5, 0.5)):
    """2D Riemann data; quadrant order (upper-right, upper-left,
    lower-left, lower-right).  Interface points take the lower-index
    quadrant, matching the cell-ownership convention."""
    q1, q2, q3, q4 = (np.asarray(s, float) for s in states)
    cx, cy = center

    def init(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        right = (x > cx)[..., None]
        top = (y > cy)[..., None]
        out = np.where(top, np.where(right, q1, q2), np.where(right, q4, q3))
        return np.broadcast_to(out, x.shape + (4,)).copy()

    return init


def _kelvin_helmholtz(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    band = (np.abs(y) <= 0.25) | np.isclose(np.abs(y), 0.25)
    rho = np.where(band, 2.0, 1.0)
    u = np.where(band, -0.5, 0.5)
    v = 1e-2 * np.sin(2.0 * np.pi * x)
    p = np.full_like(x, 2.5)
    return _stackw(rho, u, v, p)


_SHOCK_REFLECTION_TOP = np.array([1.69997, 2.61934, -0.50632, 1.52819])
_SHOCK_REFLECTION_BULK = np.array([1.0, 2.9, 0.0, 1.0 / 1.4])


def _shock_reflection(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    top = np.isclose(y, 1.0)[..., None]
    out = np.where(top, _SHOCK_REFLECTION_TOP, _SHOCK_REFLECTION_BULK)
    return np.broadcast_to(out, x.shape + (4,)).copy()


# normal shock with exact Rankine-Hugoniot states moving at speed
# _TRANSONIC_SHOCK_S; u - c = 1.2 on the left and u - c < 0 on the
# right, so the interface is transonic for the u-c family
_TRANSONIC_SHOCK_S = 0.2
_TRANSONIC_SHOCK_L = np.array([1.0, 2.0 + _TRANSONIC_SHOCK_S, 0.0, 1.0 / 1.4])
_TRANSONIC_SHOCK_R = np.array(
    [8.0 / 3.0, 0.75 + _TRANSONIC_SHOCK_S, 0.0, 45.0 / 14.0]
)


def _catalog():
    per = st.BoundarySpec()
    xper = st.BoundarySpec(
        left="outflow", right="outflow", bottom="periodic", top="periodic"
    )
    out4 = st.BoundarySpec("outflow", "outflow", "outflow", "outflow")
    cat = {}
    cat["ex1"] = ProblemSpec(
        "ex1", (0.0, 1.0), (0.0, 0.5), 0.25, per, _ex1, default_nx=32, default_ny=8
    )
    cat["vortex"] = ProblemSpec(
        "vortex", (0.0, 1.0), (0.0, 1.0), 1.0, per, _vortex,
        reference="self_at_integer_times", default_nx=64,
    )
    cat["transonic_rarefaction"] = ProblemSpec(
        "transonic_rarefaction", (-1.5, 0.5), (0.0, 0.5), 0.4, xper,
        _piecewise_x(0.0, (0.1, -2.0, 0.0, 0.1), (0.55, -1.5, 0.0, 0.55), (1.0, -1.0, 0.0, 1.0)),
        default_nx=256, default_ny=8,
    )
    cat["double_rarefaction"] = ProblemSpec(
        "double_rarefaction", (0.0, 1.0), (0.0, 0.5), 0.3, xper,
        _piecewise_x(0.5, (7.0, -1.0, 0.0, 0.2), (7.0, 0.0, 0.0, 0.2), (7.0, 1.0, 0.0, 0.2)),
        default_nx=128, default_ny=8,
    )
    cat["transonic_shock"] = ProblemSpec(
        "transonic_shock", (-0.5, 0.5), (0.0, 0.5), 0.5, xper,
        _piecewise_x(0.0, _TRANSONIC_SHOCK_L, _TRANSONIC_SHOCK_L, _TRANSONIC_SHOCK_R),
        reference="none", default_nx=64, default_ny=8,
    )
    # 2D Riemann quadrant states from the classical gas-dynamics
    # catalogs (Schulz-Rinne/Collins/Glaz; Lax/Liu numbering)
    rp = {
        "rp_f": (  # two shocks, two stationary contacts
            ((0.5313, 0.0, 0.0, 0.4), (1.0, 0.7276, 0.0, 1.0),
             (0.8, 0.0, 0.0, 1.0), (1.0, 0.0, 0.7276, 1.0)), 0.21),
        "rp_e": (  # four contacts
            ((1.0, 0.75, -0.5, 1.0), (2.0, 0.75, 0.5, 1.0),
             (1.0, -0.75, 0.5, 1.0), (3.0, -0.75, -0.5, 1.0)), 0.3),
        "rp_j": (  # shocks/contacts with a transonic shock on the left edge
            ((1.0, 0.0, -0.4, 1.0), (2.0, 0.0, -0.3, 1.0),
             (1.0625, 0.0, 0.2145, 0.4), (0.5197, 0.0, -1.1259, 0.4)), 0.3),
        "rp_3": (
            ((1.5, 0.0, 0.0, 1.5), (0.5323, 1.206, 0.0, 0.3),
             (0.138, 1.206, 1.206, 0.029), (0.5323, 0.0, 1.206, 0.3)), 0.8),
        "rp_4": (
            ((1.1, 0.0, 0.0, 1.1), (0.5065, 0.8939, 0.0, 0.35),
             (1.1, 0.8939, 0.8939, 1.1), (0.5065, 0.0, 0.8939, 0.35)), 0.21),
    }
    for name, (states, tend) in rp.items():
        cat[name] = ProblemSpec(
            name, (0.0, 1.0), (0.0, 1.0), tend, out4, _quadrants(states),
            reference="none", default_nx=128,
        )
    cat["kelvin_helmholtz"] = ProblemSpec(
        "kelvin_helmholtz", (-0.5, 0.5), (-0.5, 0.5), 1.0, per,
        _kelvin_helmholtz, reference="none", default_nx=128,
    )
    cat["shock_reflection"] = ProblemSpec(
        "shock_reflection", (0.0, 4.0), (0.0, 1.0), 6.0,
        st.BoundarySpec(
            left="inflow", right="outflow", bottom="wall", top="inflow",
            inflow=_shock_reflection,
        ),
        _shock_reflection, reference="none", default_nx=120, default_ny=30,
    )
    return cat


_CATALOG = _catalog()

PROBLEM_NAMES = tuple(sorted(_CATALOG))


def make_problem(name):
    try:
        return _CATALOG[name]
    except KeyError:
        raise UnknownProblem(
            "unknown problem %r; available: %s" % (name, ", ".join(PROBLEM_NAMES))
        )


def initialize(spec: ProblemSpec, grid: st.Grid, gamma=GAMMA):
    """Grid state with pointwise point values and Simpson cell averages."""
    s = st.GridState(grid)
    xv, yv, xc, yc = grid.xv(), grid.yv(), grid.xc(), grid.yc()

    def cons(x, y):
        return st.prim_to_cons(spec.init(x, y), gamma)

    s.pvv = cons(xv[:, None], yv[None, :])
    s.pvx = cons(xv[:, None], yc[None, :])
    s.pvy = cons(xc[:, None], yv[None, :])
    offx = np.array([-0.5 * grid.dx, 0.0, 0.5 * grid.dx])
    offy = np.array([-0.5 * grid.dy, 0.0, 0.5 * grid.dy])
    X = xc[:, None, None, None] + offx[None, None, :, None]
    Y = yc[None, :, None, None] + offy[None, None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    nodes = np.moveaxis(cons(X, Y), (2, 3), (0, 1))
    s.avg = st.average_from_nodes(nodes)
    return s


def restrict_averages(fine, fx=2, fy=2):
    """Block average of interior cell averages of the finer state.

    ``fx``/``fy`` are the per-direction refinement factors (1 or 2).
    """
    a = fine.grid.interior(fine.avg)
    if fx == 2:
        a = 0.5 * (a[::2] + a[1::2])
    if fy == 2:
        a = 0.5 * (a[:, ::2] + a[:, 1::2])
    return a


def reference_error(s: st.GridState, spec: ProblemSpec, finer=None, gamma=GAMMA):
    """Area-normalized L1 errors of the conservative averages, per component.

    ``finer`` is a GridState on the 2x-refined grid; for problems that
    recur to their initial data at integer times, ``finer=None`` compares
    against the initialized field on the same grid.
    """
    g = s.grid
    coarse = g.interior(s.avg)
    if finer is None:
        if spec.reference != "self_at_integer_times":
            raise GridMismatch("problem %s needs a finer reference run" % spec.name)
        ref = g.interior(initialize(spec, g, gamma).avg)
    else:
        fg = finer.grid
        if fg.nx != 2 * g.nx or fg.ny not in (g.ny, 2 * g.ny):
            raise GridMismatch("reference grid must be exactly 2x refined")
        if abs(fg.x0 - g.x0) > 1e-14 or abs(fg.y0 - g.y0) > 1e-14:
            raise GridMismatch("reference grid covers a different domain")
        # 1D profiles keep their fixed y-resolution across the ladder, so
        # the y-direction needs no restriction there
        ref = restrict_averages(finer, fy=2 if fg.ny == 2 * g.ny else 1)
    # normalize by the domain area so the norm is the mean cell difference
    return np.mean(np.abs(coarse - ref), axis=(0, 1))
