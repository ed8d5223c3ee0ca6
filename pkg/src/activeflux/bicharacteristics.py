"""Approximate evolution operators for the locally linearised Euler system.

The point values are advanced with truly multi-dimensional evolution
operators built from the method of bicharacteristics: values on the sonic
circle (the base of the backward characteristic cone) and at the cone apex
foot point P' are combined into the new point value.  The third-order
operator acts on the continuous piecewise quadratic reconstruction, the
first-order one on piecewise constant data.  A quadratic-in-time
correction term removes the local linearisation error of the nonlinear
system.

This module is the plain NumPy reference implementation; `_kernels`
provides the numerically identical batch version used by the time stepper.
"""

from dataclasses import dataclass

import numpy as np

from . import state as st
from .errors import OutOfDomain, QuadratureDegenerate
from .reconstruction import Reconstruction, locate_cell

TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-12 * TWO_PI


@dataclass(frozen=True)
class Linearisation:
    """Constant state (rho', u', v', p') the system is linearised around."""

    state: np.ndarray
    gamma: float = st.GAMMA

    @property
    def c(self):
        return float(np.sqrt(self.gamma * self.state[3] / self.state[0]))


@dataclass
class ArcDecomposition:
    """Sonic circle split into arcs that each lie in a single grid cell."""

    center: tuple
    radius: float
    arcs: list  # (theta_start, theta_end, (I, J)); theta_end > theta_start


def decompose_circle(grid, center, radius):
    """Split the circle into arcs at its intersections with grid lines."""
    cx, cy = center
    if (
        cx - radius < grid.xlo_ext
        or cx + radius > grid.xhi_ext
        or cy - radius < grid.ylo_ext
        or cy + radius > grid.yhi_ext
    ):
        raise OutOfDomain("sonic circle leaves the ghost region (CFL violated?)")
    if radius <= 0.0:
        I, J = locate_cell(grid, cx, cy)
        return ArcDecomposition(center, radius, [(0.0, TWO_PI, (int(I), int(J)))])

    angles = []
    k0 = int(np.floor((cx - radius - grid.xlo_ext) / grid.dx))
    k1 = int(np.ceil((cx + radius - grid.xlo_ext) / grid.dx))
    for k in range(k0, k1 + 1):
        d = (grid.xlo_ext + k * grid.dx - cx) / radius
        if -1.0 < d < 1.0:
            a = np.arccos(d)
            angles += [a, TWO_PI - a]
    k0 = int(np.floor((cy - radius - grid.ylo_ext) / grid.dy))
    k1 = int(np.ceil((cy + radius - grid.ylo_ext) / grid.dy))
    for k in range(k0, k1 + 1):
        d = (grid.ylo_ext + k * grid.dy - cy) / radius
        if -1.0 < d < 1.0:
            a = np.arcsin(d)
            angles += [a % TWO_PI, (np.pi - a) % TWO_PI]

    angles = sorted(angles)
    dedup = []
    for a in angles:
        if not dedup or a - dedup[-1] > ANGLE_TOL:
            dedup.append(a)
    if dedup and dedup[0] + TWO_PI - dedup[-1] <= ANGLE_TOL:
        dedup.pop()

    arcs = []
    if not dedup:
        segments = [(0.0, TWO_PI)]
    else:
        segments = [
            (dedup[i], dedup[i + 1] if i + 1 < len(dedup) else dedup[0] + TWO_PI)
            for i in range(len(dedup))
        ]
    for a0, a1 in segments:
        if a1 - a0 <= ANGLE_TOL:
            continue
        mid = 0.5 * (a0 + a1)
        I, J = locate_cell(
            grid, cx + radius * np.cos(mid), cy + radius * np.sin(mid)
        )
        arcs.append((a0, a1, (int(I), int(J))))
    return ArcDecomposition(center, radius, arcs)


def _eval(rec, x, y):
    if callable(rec):
        return rec(x, y)
    return rec.eval(x, y)


def _circle_moments(rec, grid, cx, cy, radius, n_gauss):
    """Trigonometric moments of (rho,u,v,p) over the sonic circle.

    Returns the dict of integrals over theta in [0, 2*pi) needed by the
    EG1/EG2 operators, computed arc-by-arc with Gauss-Legendre quadrature.
    """
    if grid is not None:
        arcs = decompose_circle(grid, (cx, cy), radius).arcs
    else:
        arcs = [(0.0, TWO_PI, None)]
    if not arcs:
        raise QuadratureDegenerate("empty arc decomposition")
    gx, gw = np.polynomial.legendre.leggauss(n_gauss)
    m = dict.fromkeys(
        ("p", "pc", "ps", "u", "v", "uc", "vs", "uc2", "vs2", "usc", "vsc"), 0.0
    )
    # subdivide long arcs so each Gauss panel spans at most pi/2; a single
    # panel over a long arc resolves the trigonometric weights poorly
    panels = []
    for a0, a1, _ in arcs:
        nseg = max(1, int(np.ceil((a1 - a0) / (0.5 * np.pi))))
        edges = np.linspace(a0, a1, nseg + 1)
        panels.extend(zip(edges[:-1], edges[1:]))
    for a0, a1 in panels:
        half = 0.5 * (a1 - a0)
        theta = 0.5 * (a0 + a1) + half * gx
        w = half * gw
        ct, sn = np.cos(theta), np.sin(theta)
        vals = _eval(rec, cx + radius * ct, cy + radius * sn)
        rho, u, v, p = (vals[..., k] for k in range(4))
        m["p"] = m["p"] + np.sum(w * p)
        m["pc"] = m["pc"] + np.sum(w * p * ct)
        m["ps"] = m["ps"] + np.sum(w * p * sn)
        m["u"] = m["u"] + np.sum(w * u)
        m["v"] = m["v"] + np.sum(w * v)
        m["uc"] = m["uc"] + np.sum(w * u * ct)
        m["vs"] = m["vs"] + np.sum(w * v * sn)
        m["uc2"] = m["uc2"] + np.sum(w * u * ct * ct)
        m["vs2"] = m["vs2"] + np.sum(w * v * sn * sn)
        m["usc"] = m["usc"] + np.sum(w * u * sn * ct)
        m["vsc"] = m["vsc"] + np.sum(w * v * sn * ct)
    return m


def eg2_point(rec, lin: Linearisation, x, y, tau, n_gauss=8):
    """Third-order bicharacteristic evolution of one point value.

    ``rec`` is a Reconstruction or any callable ``f(x, y) -> (..., 4)`` in
    primitive variables; the result approximates the solution of the
    linearised system at (x, y, t_n + tau) from data at t_n.
    """
    if tau == 0.0:
        return np.asarray(_eval(rec, x, y), dtype=np.float64)
    rho1, u1, v1, p1 = lin.state
    c = lin.c
    cx, cy, r = x - u1 * tau, y - v1 * tau, c * tau
    grid = None if callable(rec) else rec.grid
    m = _circle_moments(rec, grid, cx, cy, r, n_gauss)
    fp = _eval(rec, cx, cy)
    rho0, u0, v0, p0 = (float(fp[..., k]) for k in range(4))
    inv_pi = 1.0 / np.pi
    c2 = c * c
    rho = rho0 - 2.0 * p0 / c2 + inv_pi * (
        m["p"] / c2 - (rho1 / c) * (m["uc"] + m["vs"])
    )
    u = inv_pi * (
        -m["pc"] / (rho1 * c) + 2.0 * m["uc2"] - 0.5 * m["u"] + 2.0 * m["vsc"]
    )
    v = inv_pi * (
        -m["ps"] / (rho1 * c) + 2.0 * m["usc"] + 2.0 * m["vs2"] - 0.5 * m["v"]
    )
    p = -p0 + inv_pi * (m["p"] - rho1 * c * (m["uc"] + m["vs"]))
    return np.array([rho, u, v, p])


def eg1_point(rec, lin: Linearisation, x, y, tau, n_gauss=8):
    """First-order bicharacteristic evolution, intended for pc data."""
    if tau == 0.0:
        return np.asarray(_eval(rec, x, y), dtype=np.float64)
    rho1, u1, v1, p1 = lin.state
    c = lin.c
    cx, cy, r = x - u1 * tau, y - v1 * tau, c * tau
    grid = None if callable(rec) else rec.grid
    m = _circle_moments(rec, grid, cx, cy, r, n_gauss)
    fp = _eval(rec, cx, cy)
    rho0, u0, v0, p0 = (float(fp[..., k]) for k in range(4))
    inv_2pi = 0.5 / np.pi
    c2 = c * c
    rho = rho0 - p0 / c2 + inv_2pi * (
        m["p"] / c2 - 2.0 * (rho1 / c) * (m["uc"] + m["vs"])
    )
    u = 0.5 * u0 + inv_2pi * (
        -2.0 * m["pc"] / (rho1 * c) + 3.0 * m["uc2"] - m["u"] + 3.0 * m["vsc"]
    )
    v = 0.5 * v0 + inv_2pi * (
        -2.0 * m["ps"] / (rho1 * c) + 3.0 * m["usc"] + 3.0 * m["vs2"] - m["v"]
    )
    p = inv_2pi * (m["p"] - 2.0 * rho1 * c * (m["uc"] + m["vs"]))
    return np.array([rho, u, v, p])


def correction_bracket(w, wx, wy, gamma=st.GAMMA):
    """The quadratic-in-time linearisation-error bracket, per unit tau^2/2.

    ``w`` are primitive states, ``wx``/``wy`` their spatial derivatives;
    all with the component axis last.  Broadcasts over leading axes.
    """
    rho, u, v, p = (w[..., k] for k in range(4))
    rx, ux, vx, px = (wx[..., k] for k in range(4))
    ry, uy, vy, py = (wy[..., k] for k in range(4))
    f1 = ux * ux + uy * vx
    f2 = uy * vx + vy * vy
    g1 = px * (gamma * (ux + vy) + ux) + py * vx
    g2 = py * (gamma * (ux + vy) + vy) + px * uy
    h1 = (rx * px + ry * py) / rho
    h2 = (rx * u + ry * v) / (rho * rho)
    out = np.empty(np.broadcast(w, wx, wy).shape)
    out[..., 0] = (
        rho * (f1 + f2)
        + u * (rx * (2.0 * ux + vy) + ry * vx)
        + v * (rx * uy + ry * (ux + 2.0 * vy))
        - h1
    )
    out[..., 1] = u * f1 + v * uy * (ux + vy) + g1 / rho - px * h2
    out[..., 2] = v * f2 + u * vx * (ux + vy) + g2 / rho - py * h2
    out[..., 3] = u * g1 + v * g2 + gamma * p * (f1 + f2 - h1 / rho)
    return out


def correction_term(w, wx, wy, tau, gamma=st.GAMMA):
    """Correction added to the linearised update; exactly quadratic in tau."""
    return 0.5 * tau * tau * correction_bracket(w, wx, wy, gamma)


def derivative_fields(vert, xedge, yedge, dx, dy):
    """Centered-difference gradients of the primitive point values.

    Returns {"vertex": (wx, wy), "xedge": ..., "yedge": ...} with arrays
    shaped like the node arrays; entries that lack a neighbour (the
    outermost index in the differencing direction) are zero.

    Stencils: at a vertex the four adjacent edge midpoints (spacing dx/2,
    dy/2); at an edge midpoint the two endpoint vertices along the edge
    and the two same-type midpoints of the adjacent cells across it.
    """
    out = {}
    wx = np.zeros_like(vert)
    wy = np.zeros_like(vert)
    wx[1:-1, :] = (yedge[1:, :] - yedge[:-1, :]) / dx
    wy[:, 1:-1] = (xedge[:, 1:] - xedge[:, :-1]) / dy
    out["vertex"] = (wx, wy)

    wx = np.zeros_like(xedge)
    wy = np.zeros_like(xedge)
    wx[1:-1, :] = (xedge[2:, :] - xedge[:-2, :]) / (2.0 * dx)
    wy[:, :] = (vert[:, 1:] - vert[:, :-1]) / dy
    out["xedge"] = (wx, wy)

    wx = np.zeros_like(yedge)
    wy = np.zeros_like(yedge)
    wx[:, :] = (vert[1:, :] - vert[:-1, :]) / dx
    wy[:, 1:-1] = (yedge[:, 2:] - yedge[:, :-2]) / (2.0 * dy)
    out["yedge"] = (wx, wy)
    return out


def derivatives_at(s: st.GridState, location, gamma=st.GAMMA):
    """Primitive-variable gradient at one stored point-value site.

    ``location`` is ("vertex"|"xedge"|"yedge", I, J) in global array
    indices.  Returns (wx, wy), each a length-4 array.
    """
    kind, I, J = location
    vert = st.cons_to_prim(s.pvv, gamma)
    xedge = st.cons_to_prim(s.pvx, gamma)
    yedge = st.cons_to_prim(s.pvy, gamma)
    wx, wy = derivative_fields(vert, xedge, yedge, s.grid.dx, s.grid.dy)[kind]
    return wx[I, J], wy[I, J]


def _flux_x(q, gamma):
    rho, mx, my, E = (q[..., k] for k in range(4))
    u = mx / rho
    p = (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho)
    return np.stack([mx, mx * u + p, my * u, u * (E + p)], axis=-1)


def _flux_y(q, gamma):
    rho, mx, my, E = (q[..., k] for k in range(4))
    v = my / rho
    p = (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho)
    return np.stack([my, mx * v, my * v + p, v * (E + p)], axis=-1)


def lf_neighbors(s: st.GridState, location):
    """West/east/north/south point-value neighbours of a site (cons vars)."""
    kind, I, J = location
    if kind == "vertex":
        return s.pvy[I - 1, J], s.pvy[I, J], s.pvx[I, J - 1], s.pvx[I, J]
    if kind == "xedge":
        return s.pvx[I - 1, J], s.pvx[I + 1, J], s.pvv[I, J], s.pvv[I, J + 1]
    return s.pvv[I, J], s.pvv[I + 1, J], s.pvy[I, J - 1], s.pvy[I, J + 1]


def lf_point_update(s: st.GridState, location, tau, gamma=st.GAMMA):
    """Local Lax-Friedrichs update of one point value; returns primitive."""
    kind, I, J = location
    qc = {"vertex": s.pvv, "xedge": s.pvx, "yedge": s.pvy}[kind][I, J]
    qw, qe, qs, qn = lf_neighbors(s, location)
    stencil = np.stack([qc, qw, qe, qs, qn])
    w = st.cons_to_prim(stencil, gamma)
    cs = st.sound_speed(w, gamma)
    ax = np.max(np.abs(w[:, 1]) + cs)
    ay = np.max(np.abs(w[:, 2]) + cs)

    def lf(fl, fr, ql, qr, a):
        return 0.5 * (fl + fr) - 0.5 * a * (qr - ql)

    fe = lf(_flux_x(qc, gamma), _flux_x(qe, gamma), qc, qe, ax)
    fw = lf(_flux_x(qw, gamma), _flux_x(qc, gamma), qw, qc, ax)
    gn = lf(_flux_y(qc, gamma), _flux_y(qn, gamma), qc, qn, ay)
    gs = lf(_flux_y(qs, gamma), _flux_y(qc, gamma), qs, qc, ay)
    qnew = qc - (tau / s.grid.dx) * (fe - fw) - (tau / s.grid.dy) * (gn - gs)
    return st.cons_to_prim(qnew, gamma, check=False)
