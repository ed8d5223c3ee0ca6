"""Transonic-shock detection, shock-indicator blending and bound preservation.

Three independent safety nets around the high-order point update:

* transonic flags switch the full-step linearisation of affected points to
  a neighbour-averaged state so that a steady transonic shock is not
  frozen by a one-sided supersonic linearisation;
* a smooth indicator theta in [0,1], driven by second differences of the
  pressure averages, blends the high-order value with a first-order one
  near shocks;
* an admissibility cascade (orchestrated by the time stepper) falls back
  from the high-order value to the first-order one and finally to a local
  Lax-Friedrichs update whenever density or pressure drop below the floor.
"""

from dataclasses import dataclass

import numpy as np

from . import state as st


@dataclass
class TransonicFlags:
    """Per-vertex indicator; edge midpoints inherit via the max rule."""

    vertex: np.ndarray  # (NX+1, NY+1) bool
    xedge: np.ndarray   # (NX+1, NY)  bool, midpoints of vertical edges
    yedge: np.ndarray   # (NX,  NY+1) bool, midpoints of horizontal edges


@dataclass
class ThetaField:
    """Blending factor per point site, 1 = pure high order."""

    vertex: np.ndarray
    xedge: np.ndarray
    yedge: np.ndarray


def detect_transonic(pavg, grid, gamma=st.GAMMA):
    """Flag vertices that sit inside a transonic sign change of u+-c.

    ``pavg`` are primitive cell averages over the extended grid.  A vertex
    is flagged when, for either characteristic family u+c or u-c (and the
    v analogues in y), the speed is positive on the upwind side and
    negative on the downwind side across one of the four cell pairs
    around the vertex.
    """
    u = pavg[..., 1]
    v = pavg[..., 2]
    c = st.sound_speed(pavg, gamma)
    NX, NY = grid.NX, grid.NY
    vertex = np.zeros((NX + 1, NY + 1), dtype=bool)
    # cells around interior vertex (I, J): (I-1, J-1), (I, J-1), (I-1, J), (I, J)
    for s in (1.0, -1.0):
        a = u + s * c
        b = v + s * c
        hit = (
            ((a[:-1, 1:] > 0.0) & (a[1:, 1:] < 0.0))
            | ((a[:-1, :-1] > 0.0) & (a[1:, :-1] < 0.0))
            | ((b[:-1, :-1] > 0.0) & (b[:-1, 1:] < 0.0))
            | ((b[1:, :-1] > 0.0) & (b[1:, 1:] < 0.0))
        )
        vertex[1:NX, 1:NY] |= hit
    xedge = vertex[:, :-1] | vertex[:, 1:]
    yedge = vertex[:-1, :] | vertex[1:, :]
    return TransonicFlags(vertex, xedge, yedge)


def _jst_ratio(p, axis):
    """Second-difference pressure sensor |p_+ - 2p_0 + p_-|/(p_+ + 2p_0 + p_-).

    Returned per cell; zero padding at the extended-grid rim.
    """
    r = np.zeros(p.shape)
    if axis == 0:
        num = np.abs(p[2:, :] - 2.0 * p[1:-1, :] + p[:-2, :])
        den = p[2:, :] + 2.0 * p[1:-1, :] + p[:-2, :]
        r[1:-1, :] = num / den
    else:
        num = np.abs(p[:, 2:] - 2.0 * p[:, 1:-1] + p[:, :-2])
        den = p[:, 2:] + 2.0 * p[:, 1:-1] + p[:, :-2]
        r[:, 1:-1] = num / den
    return r


def shock_theta(pavg, grid, gamma=st.GAMMA):
    """Shock-indicator blending factors at every point site.

    Per edge: phi1 is the larger JST pressure sensor of the two cells
    meeting at the edge, phi2 = 2**max(|speed| + c) over those cells with
    the edge-normal velocity, theta = exp(-phi1*phi2).  A vertex takes the
    minimum over its four adjacent edges.
    """
    p = pavg[..., 3]
    c = st.sound_speed(pavg, gamma)
    NX, NY = grid.NX, grid.NY

    rx = _jst_ratio(p, 0)
    sx = np.abs(pavg[..., 1]) + c
    theta_x = np.ones((NX + 1, NY))
    phi1 = np.maximum(rx[:-1, :], rx[1:, :])
    phi2 = 2.0 ** np.maximum(sx[:-1, :], sx[1:, :])
    theta_x[1:NX, :] = np.exp(-phi1 * phi2)[: NX - 1, :]

    ry = _jst_ratio(p, 1)
    sy = np.abs(pavg[..., 2]) + c
    theta_y = np.ones((NX, NY + 1))
    phi1 = np.maximum(ry[:, :-1], ry[:, 1:])
    phi2 = 2.0 ** np.maximum(sy[:, :-1], sy[:, 1:])
    theta_y[:, 1:NY] = np.exp(-phi1 * phi2)[:, : NY - 1]

    theta_v = np.ones((NX + 1, NY + 1))
    theta_v[:, 1:NY] = np.minimum(theta_x[:, :-1], theta_x[:, 1:])[:, : NY - 1]
    theta_v[1:NX, :] = np.minimum(
        theta_v[1:NX, :],
        np.minimum(theta_y[:-1, :], theta_y[1:, :])[: NX - 1, :],
    )
    return ThetaField(theta_v, theta_x, theta_y)


def blend_point(w_ho, w_lo, theta):
    """Convex combination of primitive states, theta = high-order weight."""
    th = np.asarray(theta)[..., None]
    return th * np.asarray(w_ho) + (1.0 - th) * np.asarray(w_lo)


def neighbor_average(pavg, grid):
    """Primitive neighbour-averaged states at every point site.

    Vertices average the four surrounding cell averages, edge midpoints
    the two cells sharing the edge.  Returned for the full extended grid;
    rim sites reuse the nearest valid average.
    """
    NX, NY = grid.NX, grid.NY
    vert = np.empty((NX + 1, NY + 1, 4))
    vert[1:NX, 1:NY] = 0.25 * (
        pavg[:-1, :-1] + pavg[1:, :-1] + pavg[:-1, 1:] + pavg[1:, 1:]
    )
    vert[0] = vert[1]
    vert[NX] = vert[NX - 1]
    vert[:, 0] = vert[:, 1]
    vert[:, NY] = vert[:, NY - 1]

    xedge = np.empty((NX + 1, NY, 4))
    xedge[1:NX] = 0.5 * (pavg[:-1] + pavg[1:])
    xedge[0] = xedge[1]
    xedge[NX] = xedge[NX - 1]

    yedge = np.empty((NX, NY + 1, 4))
    yedge[:, 1:NY] = 0.5 * (pavg[:, :-1] + pavg[:, 1:])
    yedge[:, 0] = yedge[:, 1]
    yedge[:, NY] = yedge[:, NY - 1]
    return vert, xedge, yedge
