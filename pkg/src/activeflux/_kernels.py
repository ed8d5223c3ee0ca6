"""Compiled batch kernels for the bicharacteristic point evolution.

These mirror `bicharacteristics.eg2_point` / `eg1_point` exactly but act
on flat batches of sites so that a whole grid of point values is advanced
in one parallel call.  The quadratic reconstruction is evaluated inline
from the shared primitive node arrays.

Status codes returned per point: 0 ok, 1 sonic circle left the ghost
region (CFL violation).
"""

import numpy as np
from numba import njit, prange

_GX, _GW = np.polynomial.legendre.leggauss(8)
TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-12 * TWO_PI
MAX_ANGLES = 32


@njit(cache=True, fastmath=True, inline="always")
def _locate(t, n):
    i = int(np.ceil(t)) - 1
    if i < 0:
        i = 0
    elif i > n - 1:
        i = n - 1
    return i


@njit(cache=True, fastmath=True)
def _eval_cpq(vert, xedge, yedge, center, xlo, ylo, dx, dy, x, y, out):
    nx_cells = center.shape[0]
    ny_cells = center.shape[1]
    tx = (x - xlo) / dx
    ty = (y - ylo) / dy
    I = _locate(tx, nx_cells)
    J = _locate(ty, ny_cells)
    xi = 2.0 * (tx - I) - 1.0
    eta = 2.0 * (ty - J) - 1.0
    nxm = 0.5 * xi * (xi - 1.0)
    nx0 = 1.0 - xi * xi
    nxp = 0.5 * xi * (xi + 1.0)
    nym = 0.5 * eta * (eta - 1.0)
    ny0 = 1.0 - eta * eta
    nyp = 0.5 * eta * (eta + 1.0)
    for k in range(4):
        out[k] = (
            nxm * (nym * vert[I, J, k] + ny0 * xedge[I, J, k] + nyp * vert[I, J + 1, k])
            + nx0 * (nym * yedge[I, J, k] + ny0 * center[I, J, k] + nyp * yedge[I, J + 1, k])
            + nxp * (nym * vert[I + 1, J, k] + ny0 * xedge[I + 1, J, k] + nyp * vert[I + 1, J + 1, k])
        )


@njit(cache=True, fastmath=True, inline="always")
def _pc_span(t, n):
    # points on an interior face average the two adjacent cells so the
    # evaluation has no directional bias
    k = int(np.floor(t + 0.5))
    if 0 < k < n and abs(t - k) <= 1e-12:
        return k - 1, k
    i = _locate(t, n)
    return i, i


@njit(cache=True, fastmath=True)
def _eval_pc(pavg, xlo, ylo, dx, dy, x, y, out):
    i0, i1 = _pc_span((x - xlo) / dx, pavg.shape[0])
    j0, j1 = _pc_span((y - ylo) / dy, pavg.shape[1])
    w = 1.0 / ((i1 - i0 + 1) * (j1 - j0 + 1))
    for k in range(4):
        acc = 0.0
        for ii in range(i0, i1 + 1):
            for jj in range(j0, j1 + 1):
                acc += pavg[ii, jj, k]
        out[k] = w * acc


@njit(cache=True, fastmath=True)
def _collect_angles(cx, cy, radius, xlo, ylo, dx, dy, angles):
    """Crossing angles of the circle with grid lines, sorted and deduped."""
    na = 0
    k0 = int(np.floor((cx - radius - xlo) / dx))
    k1 = int(np.ceil((cx + radius - xlo) / dx))
    for k in range(k0, k1 + 1):
        d = (xlo + k * dx - cx) / radius
        if -1.0 < d < 1.0:
            a = np.arccos(d)
            angles[na] = a
            angles[na + 1] = TWO_PI - a
            na += 2
    k0 = int(np.floor((cy - radius - ylo) / dy))
    k1 = int(np.ceil((cy + radius - ylo) / dy))
    for k in range(k0, k1 + 1):
        d = (ylo + k * dy - cy) / radius
        if -1.0 < d < 1.0:
            a = np.arcsin(d)
            angles[na] = a % TWO_PI
            angles[na + 1] = (np.pi - a) % TWO_PI
            na += 2
    # insertion sort; na is small (<= 8 under the CFL bound)
    for i in range(1, na):
        key = angles[i]
        j = i - 1
        while j >= 0 and angles[j] > key:
            angles[j + 1] = angles[j]
            j -= 1
        angles[j + 1] = key
    nd = 0
    for i in range(na):
        if nd == 0 or angles[i] - angles[nd - 1] > ANGLE_TOL:
            angles[nd] = angles[i]
            nd += 1
    if nd > 1 and angles[0] + TWO_PI - angles[nd - 1] <= ANGLE_TOL:
        nd -= 1
    return nd


@njit(parallel=True, cache=True, fastmath=True)
def evolve_points(
    xs,
    ys,
    lins,
    tau,
    gamma,
    order,
    use_pc,
    vert,
    xedge,
    yedge,
    center,
    pavg,
    xlo,
    ylo,
    dx,
    dy,
    out,
    status,
):
    """Advance a batch of point values by one bicharacteristic step.

    xs, ys : (n,) site coordinates
    lins   : (n, 4) primitive linearisation states
    order  : 2 for the third-order operator, 1 for the first-order one
    use_pc : evaluate the piecewise constant reconstruction instead of the
             continuous piecewise quadratic one
    out    : (n, 4) primitive results
    """
    nx_cells = pavg.shape[0]
    ny_cells = pavg.shape[1]
    xhi = xlo + nx_cells * dx
    yhi = ylo + ny_cells * dy
    n = xs.shape[0]
    for i in prange(n):
        status[i] = 0
        fp = np.empty(4)
        val = np.empty(4)
        x = xs[i]
        y = ys[i]
        if tau == 0.0:
            if use_pc:
                _eval_pc(pavg, xlo, ylo, dx, dy, x, y, fp)
            else:
                _eval_cpq(vert, xedge, yedge, center, xlo, ylo, dx, dy, x, y, fp)
            for k in range(4):
                out[i, k] = fp[k]
            continue
        rho1 = lins[i, 0]
        u1 = lins[i, 1]
        v1 = lins[i, 2]
        p1 = lins[i, 3]
        c = np.sqrt(gamma * p1 / rho1)
        cx = x - u1 * tau
        cy = y - v1 * tau
        radius = c * tau
        if (
            cx - radius < xlo
            or cx + radius > xhi
            or cy - radius < ylo
            or cy + radius > yhi
        ):
            status[i] = 1
            continue
        if use_pc:
            _eval_pc(pavg, xlo, ylo, dx, dy, cx, cy, fp)
        else:
            _eval_cpq(vert, xedge, yedge, center, xlo, ylo, dx, dy, cx, cy, fp)

        angles = np.empty(MAX_ANGLES)
        nd = _collect_angles(cx, cy, radius, xlo, ylo, dx, dy, angles)

        m_p = 0.0
        m_pc = 0.0
        m_ps = 0.0
        m_u = 0.0
        m_v = 0.0
        m_uc = 0.0
        m_vs = 0.0
        m_uc2 = 0.0
        m_vs2 = 0.0
        m_usc = 0.0
        m_vsc = 0.0
        narc = nd if nd > 0 else 1
        for ia in range(narc):
            if nd == 0:
                a0 = 0.0
                a1 = TWO_PI
            else:
                a0 = angles[ia]
                a1 = angles[ia + 1] if ia + 1 < nd else angles[0] + TWO_PI
            if a1 - a0 <= ANGLE_TOL:
                continue
            # split long arcs so each Gauss panel spans at most pi/2
            nseg = int(np.ceil((a1 - a0) / (0.5 * np.pi)))
            if nseg < 1:
                nseg = 1
            seg = (a1 - a0) / nseg
            for isg in range(nseg):
                b0 = a0 + isg * seg
                half = 0.5 * seg
                mid = b0 + half
                for ig in range(8):
                    theta = mid + half * _GX[ig]
                    w = half * _GW[ig]
                    ct = np.cos(theta)
                    sn = np.sin(theta)
                    if use_pc:
                        _eval_pc(
                            pavg, xlo, ylo, dx, dy,
                            cx + radius * ct, cy + radius * sn, val,
                        )
                    else:
                        _eval_cpq(
                            vert, xedge, yedge, center, xlo, ylo, dx, dy,
                            cx + radius * ct, cy + radius * sn, val,
                        )
                    pv = val[3]
                    uv = val[1]
                    vv = val[2]
                    m_p += w * pv
                    m_pc += w * pv * ct
                    m_ps += w * pv * sn
                    m_u += w * uv
                    m_v += w * vv
                    m_uc += w * uv * ct
                    m_vs += w * vv * sn
                    m_uc2 += w * uv * ct * ct
                    m_vs2 += w * vv * sn * sn
                    m_usc += w * uv * sn * ct
                    m_vsc += w * vv * sn * ct

        c2 = c * c
        if order == 2:
            inv_pi = 1.0 / np.pi
            out[i, 0] = fp[0] - 2.0 * fp[3] / c2 + inv_pi * (
                m_p / c2 - (rho1 / c) * (m_uc + m_vs)
            )
            out[i, 1] = inv_pi * (
                -m_pc / (rho1 * c) + 2.0 * m_uc2 - 0.5 * m_u + 2.0 * m_vsc
            )
            out[i, 2] = inv_pi * (
                -m_ps / (rho1 * c) + 2.0 * m_usc + 2.0 * m_vs2 - 0.5 * m_v
            )
            out[i, 3] = -fp[3] + inv_pi * (m_p - rho1 * c * (m_uc + m_vs))
        else:
            inv_2pi = 0.5 / np.pi
            out[i, 0] = fp[0] - fp[3] / c2 + inv_2pi * (
                m_p / c2 - 2.0 * (rho1 / c) * (m_uc + m_vs)
            )
            out[i, 1] = 0.5 * fp[1] + inv_2pi * (
                -2.0 * m_pc / (rho1 * c) + 3.0 * m_uc2 - m_u + 3.0 * m_vsc
            )
            out[i, 2] = 0.5 * fp[2] + inv_2pi * (
                -2.0 * m_ps / (rho1 * c) + 3.0 * m_usc + 3.0 * m_vs2 - m_v
            )
            out[i, 3] = inv_2pi * (m_p - 2.0 * rho1 * c * (m_uc + m_vs))
