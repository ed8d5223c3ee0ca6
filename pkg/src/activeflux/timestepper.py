"""One full time step: point-value evolution, Simpson fluxes, FV update.

The update is fully discrete: both the half-step and the full-step point
values are evolved from the time-t_n reconstruction (with tau = dt/2 and
dt), never from an intermediate reconstruction.  The intermediate values
enter the flux quadrature in time and, depending on the strategy, seed
the linearisation of the full step.
"""

from dataclasses import dataclass, replace
import warnings

import numpy as np

from . import state as st
from . import limiting as lim
from . import _kernels
from .bicharacteristics import (
    correction_term,
    derivative_fields,
    lf_point_update,
)
from .errors import FatalInadmissible, InadmissibleAverage, OutOfDomain
from .reconstruction import build_cpq

STRATEGIES = ("nested", "simplified", "neighbor_avg")


@dataclass
class SchemeConfig:
    cfl: float = 0.27
    strategy: str = "neighbor_avg"
    correction: bool = True
    bound_preserving: bool = True
    shock_indicator: bool = True
    transonic_fix: bool = True
    composition: str = "blend_then_bound"  # or "bound_then_blend"
    positivity_floor: float = st.DEFAULT_FLOOR
    gauss_order: int = 8
    gamma: float = st.GAMMA
    clip_averages: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError("unknown strategy %r" % self.strategy)
        if self.composition not in ("blend_then_bound", "bound_then_blend"):
            raise ValueError("unknown composition %r" % self.composition)
        if not 0.0 < self.cfl:
            raise ValueError("cfl must be positive")
        if self.cfl > 0.279:
            warnings.warn("cfl %g exceeds the stability bound 0.279" % self.cfl)


def stable_dt(s: st.GridState, cfg: SchemeConfig, pavg=None):
    """CFL time step from the interior cell averages."""
    if pavg is None:
        pavg = st.primitive_averages(s, cfg.gamma)
    w = s.grid.interior(pavg)
    speed = np.maximum(np.abs(w[..., 1]), np.abs(w[..., 2])) + st.sound_speed(
        w, cfg.gamma
    )
    h = min(s.grid.dx, s.grid.dy)
    dt = cfg.cfl * h / float(np.max(speed))
    if not np.isfinite(dt) or dt <= 0.0:
        raise FatalInadmissible(
            "no stable time step: cell averages yield non-finite wave speeds"
        )
    return dt


class _SiteSet:
    """Interior-closure point sites of one kind, flattened for the kernels.

    Window slices select every stored site that either is a degree of
    freedom of an interior cell or sits on the interior boundary.
    """

    def __init__(self, grid, kind):
        ng, nx, ny = grid.ng, grid.nx, grid.ny
        self.kind = kind
        if kind == "vertex":
            self.i0, self.ni = ng, nx + 1
            self.j0, self.nj = ng, ny + 1
            xs = grid.xv()[ng : ng + nx + 1]
            ys = grid.yv()[ng : ng + ny + 1]
        elif kind == "xedge":
            self.i0, self.ni = ng, nx + 1
            self.j0, self.nj = ng, ny
            xs = grid.xv()[ng : ng + nx + 1]
            ys = grid.yc()[ng : ng + ny]
        else:
            self.i0, self.ni = ng, nx
            self.j0, self.nj = ng, ny + 1
            xs = grid.xc()[ng : ng + nx]
            ys = grid.yv()[ng : ng + ny + 1]
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        self.xs = np.ascontiguousarray(X.ravel())
        self.ys = np.ascontiguousarray(Y.ravel())
        self.n = self.xs.size

    def window(self, arr):
        """The interior-closure window of the full stored array."""
        return arr[self.i0 : self.i0 + self.ni, self.j0 : self.j0 + self.nj]

    def flat(self, arr):
        return np.ascontiguousarray(self.window(arr).reshape(self.n, -1))

    def global_index(self, flat_idx):
        iw, jw = divmod(int(flat_idx), self.nj)
        return self.i0 + iw, self.j0 + jw


def _site_sets(grid):
    return {k: _SiteSet(grid, k) for k in ("vertex", "xedge", "yedge")}


def _run_kernel(ss, rec, lins, tau, cfg, order=2, use_pc=False, sel=None):
    """Evolve the site batch (or the selected subset) with the compiled kernel."""
    g = rec.grid
    xs, ys = ss.xs, ss.ys
    if sel is not None:
        xs, ys, lins = xs[sel], ys[sel], lins[sel]
    if not (np.all(np.isfinite(lins)) and np.all(st.is_admissible(lins))):
        raise FatalInadmissible(
            "non-finite linearisation state or non-positive density/pressure"
        )
    out = np.empty((xs.size, 4))
    status = np.zeros(xs.size, dtype=np.int8)
    center = rec.center if rec.center is not None else rec.pavg
    vert = rec.vert if rec.vert is not None else rec.pavg[:-1, :-1]
    xedge = rec.xedge if rec.xedge is not None else rec.pavg
    yedge = rec.yedge if rec.yedge is not None else rec.pavg
    _kernels.evolve_points(
        xs,
        ys,
        np.ascontiguousarray(lins),
        tau,
        cfg.gamma,
        order,
        use_pc or rec.kind == "pc",
        vert,
        xedge,
        yedge,
        center,
        rec.pavg,
        g.xlo_ext,
        g.ylo_ext,
        g.dx,
        g.dy,
        out,
        status,
    )
    if status.any():
        raise OutOfDomain(
            "%d sonic circles left the ghost region (kind %s, tau %g)"
            % (int(status.sum()), ss.kind, tau)
        )
    return out


def _safe_lins(lins, fallback, floor):
    """Replace inadmissible linearisation states by the fallback ones."""
    bad = ~st.is_admissible(lins, floor)
    if np.any(bad):
        lins = lins.copy()
        lins[bad] = fallback[bad]
    return lins


class _Stepper:
    """Per-step working context shared by the half and full point updates."""

    def __init__(self, s, cfg, rec):
        self.s = s
        self.cfg = cfg
        self.rec = rec
        self.grid = s.grid
        self.sites = _site_sets(s.grid)
        self.navg_full = lim.neighbor_average(rec.pavg, s.grid)
        self.navg = {
            "vertex": self.sites["vertex"].flat(self.navg_full[0]),
            "xedge": self.sites["xedge"].flat(self.navg_full[1]),
            "yedge": self.sites["yedge"].flat(self.navg_full[2]),
        }
        self.w_now = {
            "vertex": self.sites["vertex"].flat(rec.vert),
            "xedge": self.sites["xedge"].flat(rec.xedge),
            "yedge": self.sites["yedge"].flat(rec.yedge),
        }
        node_arrays = {"vertex": rec.vert, "xedge": rec.xedge, "yedge": rec.yedge}
        dfields = derivative_fields(
            rec.vert, rec.xedge, rec.yedge, s.grid.dx, s.grid.dy
        )
        self.derivs = {
            k: (self.sites[k].flat(dfields[k][0]), self.sites[k].flat(dfields[k][1]))
            for k in node_arrays
        }
        self.fallback_counts = {"eg1": 0, "lf": 0}

    def correction(self, kind, tau):
        wx, wy = self.derivs[kind]
        return correction_term(self.w_now[kind], wx, wy, tau, self.cfg.gamma)

    def high_order(self, kind, lins, tau):
        w = _run_kernel(self.sites[kind], self.rec, lins, tau, self.cfg)
        if self.cfg.correction:
            w = w + self.correction(kind, tau)
        return w

    def low_order(self, kind, lins, tau, sel=None):
        return _run_kernel(
            self.sites[kind], self.rec, lins, tau, self.cfg, order=1, use_pc=True,
            sel=sel,
        )

    def bound(self, kind, w, tau):
        """Admissibility cascade: EG1 on pc data, then local Lax-Friedrichs."""
        cfg = self.cfg
        floor = cfg.positivity_floor
        bad = ~st.is_admissible(w, floor)
        if not np.any(bad):
            return w
        self.fallback_counts["eg1"] += int(bad.sum())
        sel = np.flatnonzero(bad)
        w = w.copy()
        w[sel] = self.low_order(kind, self.navg[kind], tau, sel=sel)
        still = sel[~st.is_admissible(w[sel], floor)]
        if still.size:
            self.fallback_counts["lf"] += int(still.size)
            ss = self.sites[kind]
            for fi in still:
                I, J = ss.global_index(fi)
                w[fi] = lf_point_update(self.s, (kind, I, J), tau, cfg.gamma)
            if np.any(~st.is_admissible(w[still], floor)):
                raise FatalInadmissible(
                    "point values inadmissible after the Lax-Friedrichs "
                    "fallback (kind %s, tau %g)" % (kind, tau)
                )
        return w

    def _blend(self, kind, w, lins, tau, th):
        # evaluate the low-order operator only where theta differs from 1
        sel = np.flatnonzero(th < 1.0 - 1e-12)
        if sel.size == 0:
            return w
        safe = _safe_lins(lins, self.navg[kind], self.cfg.positivity_floor)
        w_lo = self.low_order(kind, safe, tau, sel=sel)
        w = w.copy()
        w[sel] = lim.blend_point(w[sel], w_lo, th[sel])
        return w

    def limited(self, kind, lins, tau, theta):
        """High-order value with shock blending and the bounding cascade."""
        cfg = self.cfg
        w = self.high_order(kind, lins, tau)
        th = None
        if cfg.shock_indicator and theta is not None:
            th = self.sites[kind].flat(getattr(theta, kind)).ravel()
        if th is not None and cfg.composition == "blend_then_bound":
            w = self._blend(kind, w, lins, tau, th)
        if cfg.bound_preserving:
            w = self.bound(kind, w, tau)
        if th is not None and cfg.composition == "bound_then_blend":
            w = self._blend(kind, w, lins, tau, th)
            if cfg.bound_preserving:
                w = self.bound(kind, w, tau)
        return w


def half_step_points(ctx: _Stepper, dt, theta=None):
    """Point values at t_n + dt/2, one flat (n,4) array per site kind."""
    cfg = ctx.cfg
    out = {}
    for kind in ctx.sites:
        if cfg.strategy == "neighbor_avg":
            lins = ctx.navg[kind]
        elif cfg.strategy == "simplified":
            lins = _safe_lins(ctx.w_now[kind], ctx.navg[kind], cfg.positivity_floor)
        else:  # nested: linearise around a quarter-step predictor
            pre = _run_kernel(
                ctx.sites[kind],
                ctx.rec,
                _safe_lins(ctx.w_now[kind], ctx.navg[kind], cfg.positivity_floor),
                0.25 * dt,
                cfg,
            )
            lins = _safe_lins(pre, ctx.navg[kind], cfg.positivity_floor)
        out[kind] = ctx.limited(kind, lins, 0.5 * dt, theta)
    return out


def full_step_points(ctx: _Stepper, pv_half, flags, dt, theta=None):
    """Point values at t_n + dt, evolved from the time-t_n reconstruction."""
    cfg = ctx.cfg
    out = {}
    for kind in ctx.sites:
        if cfg.strategy == "simplified":
            lins = _safe_lins(ctx.w_now[kind], ctx.navg[kind], cfg.positivity_floor)
        else:
            lins = _safe_lins(pv_half[kind], ctx.navg[kind], cfg.positivity_floor)
        if flags is not None:
            mask = ctx.sites[kind].flat(getattr(flags, kind)).ravel().astype(bool)
            if np.any(mask):
                lins = lins.copy()
                lins[mask] = ctx.navg[kind][mask]
        out[kind] = ctx.limited(kind, lins, dt, theta)
    return out


def _flux_x_prim(w, gamma):
    rho, u, v, p = (w[..., k] for k in range(4))
    E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho * u, rho * u * u + p, rho * u * v, u * (E + p)], axis=-1)


def _flux_y_prim(w, gamma):
    rho, u, v, p = (w[..., k] for k in range(4))
    E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho * v, rho * u * v, rho * v * v + p, v * (E + p)], axis=-1)


def simpson_flux_x(vert_levels, xedge_levels, gamma=st.GAMMA):
    """Time-space Simpson flux through all vertical interior edges.

    vert_levels / xedge_levels: triples of windowed primitive arrays at
    t_n, t_n+dt/2, t_n+dt; vertices shaped (nx+1, ny+1, 4), midpoints
    (nx+1, ny, 4).  Returns (nx+1, ny, 4).
    """
    acc = 0.0
    for wt, wv, wm in zip((1.0, 4.0, 1.0), vert_levels, xedge_levels):
        fv = _flux_x_prim(wv, gamma)
        fm = _flux_x_prim(wm, gamma)
        acc = acc + wt * (fv[:, :-1] + 4.0 * fm + fv[:, 1:])
    return acc / 36.0


def simpson_flux_y(vert_levels, yedge_levels, gamma=st.GAMMA):
    """Time-space Simpson flux through all horizontal interior edges."""
    acc = 0.0
    for wt, wv, wm in zip((1.0, 4.0, 1.0), vert_levels, yedge_levels):
        gv = _flux_y_prim(wv, gamma)
        gm = _flux_y_prim(wm, gamma)
        acc = acc + wt * (gv[:-1, :] + 4.0 * gm + gv[1:, :])
    return acc / 36.0


def fv_update(s: st.GridState, F, G, dt, cfg: SchemeConfig):
    """Conservative update of the interior cell averages, in place."""
    g = s.grid
    avg = g.interior(s.avg)
    avg -= (dt / g.dx) * (F[1:, :] - F[:-1, :])
    avg -= (dt / g.dy) * (G[:, 1:] - G[:, :-1])
    w = st.cons_to_prim(avg, cfg.gamma, check=False)
    bad = ~st.is_admissible(w, 0.0)
    if np.any(bad):
        if not cfg.clip_averages:
            ii, jj = np.nonzero(bad)
            raise InadmissibleAverage(
                "inadmissible cell average at interior cell (%d, %d)"
                % (ii[0], jj[0])
            )
        warnings.warn("clipping %d inadmissible cell averages" % int(bad.sum()))
        w[..., 0] = np.maximum(w[..., 0], cfg.positivity_floor)
        w[..., 3] = np.maximum(w[..., 3], cfg.positivity_floor)
        avg[bad] = st.prim_to_cons(w, cfg.gamma)[bad]


def _sync_periodic(ctx, bc, *levels):
    """Make periodic image sites bitwise equal so fluxes telescope exactly."""
    for pv in levels:
        for kind in ("vertex", "xedge", "yedge"):
            ssk = ctx.sites[kind]
            arr = pv[kind].reshape(ssk.ni, ssk.nj, 4)
            if bc.left == "periodic" and kind in ("vertex", "xedge"):
                arr[-1] = arr[0]
            if bc.bottom == "periodic" and kind in ("vertex", "yedge"):
                arr[:, -1] = arr[:, 0]


def advance(s: st.GridState, cfg: SchemeConfig, bc: st.BoundarySpec, dt=None):
    """Advance the state by one step; returns (new GridState, step info)."""
    st.fill_ghosts(s, bc, cfg.gamma)
    rec = build_cpq(s, cfg.gamma)
    if dt is None:
        dt = stable_dt(s, cfg, rec.pavg)
    ctx = _Stepper(s, cfg, rec)
    flags = lim.detect_transonic(rec.pavg, s.grid, cfg.gamma) if cfg.transonic_fix else None
    theta = lim.shock_theta(rec.pavg, s.grid, cfg.gamma) if cfg.shock_indicator else None

    half = half_step_points(ctx, dt, theta)
    new = full_step_points(ctx, half, flags, dt, theta)
    _sync_periodic(ctx, bc, half, new)

    def shaped(pv, kind):
        ssk = ctx.sites[kind]
        return pv[kind].reshape(ssk.ni, ssk.nj, 4)

    vert_lv = (
        ctx.sites["vertex"].window(rec.vert),
        shaped(half, "vertex"),
        shaped(new, "vertex"),
    )
    F = simpson_flux_x(
        vert_lv,
        (
            ctx.sites["xedge"].window(rec.xedge),
            shaped(half, "xedge"),
            shaped(new, "xedge"),
        ),
        cfg.gamma,
    )
    G = simpson_flux_y(
        vert_lv,
        (
            ctx.sites["yedge"].window(rec.yedge),
            shaped(half, "yedge"),
            shaped(new, "yedge"),
        ),
        cfg.gamma,
    )

    out = s.copy()
    out.t = s.t + dt
    fv_update(out, F, G, dt, cfg)
    for kind, arr in (("vertex", out.pvv), ("xedge", out.pvx), ("yedge", out.pvy)):
        ssk = ctx.sites[kind]
        ssk.window(arr)[...] = st.prim_to_cons(shaped(new, kind), cfg.gamma)
    info = {"dt": dt, "fallbacks": dict(ctx.fallback_counts)}
    return out, info
