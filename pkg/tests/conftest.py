"""Shared helpers for building grid states from smooth primitive fields."""

import numpy as np
import pytest

from activeflux import state as st


def state_from_callable(grid, w, gamma=st.GAMMA, t=0.0):
    """GridState with pointwise point values and Simpson cell averages.

    ``w(x, y) -> (..., 4)`` returns primitive states and broadcasts.
    """
    s = st.GridState(grid, t)
    xv, yv, xc, yc = grid.xv(), grid.yv(), grid.xc(), grid.yc()

    def cons(x, y):
        X, Y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return st.prim_to_cons(w(X, Y), gamma)

    s.pvv = cons(xv[:, None], yv[None, :])
    s.pvx = cons(xv[:, None], yc[None, :])
    s.pvy = cons(xc[:, None], yv[None, :])
    offx = np.array([-0.5 * grid.dx, 0.0, 0.5 * grid.dx])
    offy = np.array([-0.5 * grid.dy, 0.0, 0.5 * grid.dy])
    X = xc[:, None, None, None] + offx[None, None, :, None]
    Y = yc[None, :, None, None] + offy[None, None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    s.avg = st.average_from_nodes(np.moveaxis(cons(X, Y), (2, 3), (0, 1)))
    return s


def smooth_field(x, y):
    """Smooth periodic primitive field on [0,1]^2, safely admissible."""
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
    u = 0.3 + 0.1 * np.cos(2 * np.pi * x)
    v = -0.2 + 0.1 * np.sin(2 * np.pi * y)
    p = 1.0 + 0.1 * np.cos(2 * np.pi * (x + y))
    return np.stack(np.broadcast_arrays(rho, u, v, p), axis=-1)


@pytest.fixture
def unit_grid():
    return st.Grid(8, 8, 1.0 / 8, 1.0 / 8)


@pytest.fixture
def smooth_state(unit_grid):
    return state_from_callable(unit_grid, smooth_field)
