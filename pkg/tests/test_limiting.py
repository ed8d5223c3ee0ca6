"""Transonic flags, shock indicator and neighbour-averaged states."""

import numpy as np
import pytest

from activeflux import limiting as lim
from activeflux import state as st


def _uniform_pavg(grid, w):
    return np.broadcast_to(np.asarray(w, float), (grid.NX, grid.NY, 4)).copy()


def test_transonic_flags_uniform_flow(unit_grid):
    pavg = _uniform_pavg(unit_grid, [1.0, 0.5, 0.0, 1.0])
    flags = lim.detect_transonic(pavg, unit_grid)
    assert not flags.vertex.any()
    assert not flags.xedge.any() and not flags.yedge.any()


def test_transonic_flags_standing_shock(unit_grid):
    # u - c changes sign from + to - across the middle column
    g = unit_grid
    pavg = _uniform_pavg(g, [1.0, 2.0, 0.0, 1.0 / 1.4])  # u - c = 1
    right = np.array([8.0 / 3.0, 0.75, 0.0, 45.0 / 14.0])  # u - c < 0
    mid = g.NX // 2
    pavg[mid:] = right
    flags = lim.detect_transonic(pavg, g)
    assert flags.vertex[mid, 1:-1].all()
    assert not flags.vertex[: mid - 1].any()
    assert not flags.vertex[mid + 2:].any()
    # edges inherit from either endpoint vertex
    assert flags.xedge[mid].all()
    assert flags.yedge[mid - 1, 1:-1].all() and flags.yedge[mid, 1:-1].all()


def test_transonic_flags_both_signs(unit_grid):
    # u + c changing sign (supersonic inflow from the right) is detected too
    g = unit_grid
    pavg = _uniform_pavg(g, [1.0, -2.0, 0.0, 1.0 / 1.4])  # u + c = -1
    left = np.array([8.0 / 3.0, -0.75, 0.0, 45.0 / 14.0])
    mid = g.NX // 2
    pavg[:mid] = left
    flags = lim.detect_transonic(pavg, g)
    assert flags.vertex[mid, 1:-1].all()


def test_shock_theta_worked_example():
    # cells along x with pressure averages (1, 1, 2) around one edge and
    # |u| = 1, c = 1 everywhere: phi1 = 0.2, phi2 = 2^2 = 4,
    # theta = exp(-0.8) at that edge
    g = st.Grid(8, 4, 0.125, 0.125)
    pavg = _uniform_pavg(g, [1.4, 1.0, 0.0, 1.0])
    pavg[..., 0] = 1.4 * pavg[..., 3]  # keep c = 1 after the edit below
    icol = 5
    pavg[icol:, :, 3] = 2.0
    pavg[icol:, :, 0] = 1.4 * 2.0
    rx = lim._jst_ratio(pavg[..., 3], 0)
    assert rx[icol - 1, 0] == pytest.approx(0.2)
    theta = lim.shock_theta(pavg, g)
    assert theta.xedge[icol, 0] == pytest.approx(np.exp(-0.8))
    # vertices adjacent to that edge take the minimum over their edges
    assert theta.vertex[icol, 1] <= np.exp(-0.8) + 1e-12


def test_shock_theta_smooth_is_one(unit_grid):
    pavg = _uniform_pavg(unit_grid, [1.0, 0.3, -0.2, 1.0])
    theta = lim.shock_theta(pavg, unit_grid)
    assert np.allclose(theta.vertex, 1.0)
    assert np.allclose(theta.xedge, 1.0)
    assert np.allclose(theta.yedge, 1.0)


def test_blend_point_convexity():
    w_ho = np.array([[1.0, 2.0, 3.0, 4.0]])
    w_lo = np.array([[2.0, 0.0, 1.0, 2.0]])
    assert np.allclose(lim.blend_point(w_ho, w_lo, np.array([1.0])), w_ho)
    assert np.allclose(lim.blend_point(w_ho, w_lo, np.array([0.0])), w_lo)
    half = lim.blend_point(w_ho, w_lo, np.array([0.5]))
    assert np.allclose(half, 0.5 * (w_ho + w_lo))


def test_neighbor_average(unit_grid):
    g = unit_grid
    rng = np.random.default_rng(5)
    pavg = rng.uniform(0.5, 1.5, (g.NX, g.NY, 4))
    vert, xedge, yedge = lim.neighbor_average(pavg, g)
    assert vert.shape == (g.NX + 1, g.NY + 1, 4)
    I, J = 4, 5
    want = 0.25 * (pavg[I - 1, J - 1] + pavg[I, J - 1]
                   + pavg[I - 1, J] + pavg[I, J])
    assert np.allclose(vert[I, J], want)
    assert np.allclose(xedge[I, J], 0.5 * (pavg[I - 1, J] + pavg[I, J]))
    assert np.allclose(yedge[I, J], 0.5 * (pavg[I, J - 1] + pavg[I, J]))
    # rim sites reuse the nearest interior value
    assert np.allclose(vert[0], vert[1])
    assert np.allclose(xedge[-1], xedge[-2])
