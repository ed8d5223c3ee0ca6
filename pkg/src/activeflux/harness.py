"""Command line front end: single runs, convergence studies, file output.

Output contract: field CSVs with primitive variables at cell centers and
at vertices, a JSON run summary (admissibility minima, conservation
drift, wall time, step count), plain-text checkpoints that round-trip
exactly, and EOC tables as aligned text plus CSV.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import state as st
from . import problems as pb
from .errors import ActiveFluxError
from .timestepper import SchemeConfig, advance, stable_dt

LARGE_LIMIT = 512


@dataclass
class RunConfig:
    problem: str
    nx: int
    ny: int = None
    tend: float = None
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    out_dir: str = None
    output_every: int = 0  # steps between field dumps; 0 = final only
    checkpoints: bool = False

    def __post_init__(self):
        if self.nx < 4 or (self.ny is not None and self.ny < 4):
            raise ValueError("need nx, ny >= 4")
        if self.tend is not None and self.tend <= 0:
            raise ValueError("end time must be positive")


def _cell_table(s, gamma):
    g = s.grid
    w = st.cons_to_prim(g.interior(s.avg), gamma, check=False)
    xc = g.xc()[g.ng : g.ng + g.nx]
    yc = g.yc()[g.ng : g.ng + g.ny]
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    return np.column_stack(
        [X.ravel(), Y.ravel()] + [w[..., k].ravel() for k in range(4)]
    )


def _vertex_table(s, gamma):
    g = s.grid
    pv = s.pvv[g.ng : g.ng + g.nx + 1, g.ng : g.ng + g.ny + 1]
    w = st.cons_to_prim(pv, gamma, check=False)
    xv = g.xv()[g.ng : g.ng + g.nx + 1]
    yv = g.yv()[g.ng : g.ng + g.ny + 1]
    X, Y = np.meshgrid(xv, yv, indexing="ij")
    return np.column_stack(
        [X.ravel(), Y.ravel()] + [w[..., k].ravel() for k in range(4)]
    )


def write_fields(s, out_dir, tag, gamma=st.GAMMA):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = "x,y,rho,u,v,p"
    for name, table in (
        ("cells_%s.csv" % tag, _cell_table(s, gamma)),
        ("vertices_%s.csv" % tag, _vertex_table(s, gamma)),
    ):
        np.savetxt(
            out / name, table, fmt="%.12g", delimiter=",",
            header=header, comments="",
        )


def save_checkpoint(s, path):
    """Plain-text checkpoint; %.17g preserves doubles exactly."""
    g = s.grid
    with open(path, "w") as f:
        f.write(
            "grid %d %d %.17g %.17g %.17g %.17g %d\n"
            % (g.nx, g.ny, g.dx, g.dy, g.x0, g.y0, g.ng)
        )
        f.write("t %.17g\n" % s.t)
        for name in ("avg", "pvv", "pvx", "pvy"):
            arr = getattr(s, name)
            f.write("%s %s\n" % (name, " ".join(str(d) for d in arr.shape)))
            np.savetxt(f, arr.reshape(-1, 4), fmt="%.17g")


def load_checkpoint(path):
    with open(path) as f:
        tok = f.readline().split()
        g = st.Grid(
            int(tok[1]), int(tok[2]), float(tok[3]), float(tok[4]),
            float(tok[5]), float(tok[6]), int(tok[7]),
        )
        t = float(f.readline().split()[1])
        s = st.GridState(g, t)
        for name in ("avg", "pvv", "pvx", "pvy"):
            shape = tuple(int(d) for d in f.readline().split()[1:])
            n = int(np.prod(shape[:-1]))
            flat = np.loadtxt(f, max_rows=n).reshape(shape)
            setattr(s, name, flat)
    return s


def _totals(s):
    g = s.grid
    return g.interior(s.avg).sum(axis=(0, 1)) * g.dx * g.dy


def run_case(cfg: RunConfig):
    """Advance the configured problem to its end time.

    Returns (final GridState, summary dict); files are emitted when
    cfg.out_dir is set.
    """
    spec = pb.make_problem(cfg.problem)
    tend = cfg.tend if cfg.tend is not None else spec.tend
    grid = spec.grid(cfg.nx, cfg.ny)
    gamma = cfg.scheme.gamma
    s = pb.initialize(spec, grid, gamma)
    tot0 = _totals(s)
    min_rho = np.inf
    min_p = np.inf
    nsteps = 0
    fallbacks = {"eg1": 0, "lf": 0}
    wall0 = time.perf_counter()
    if cfg.out_dir:
        write_fields(s, cfg.out_dir, "t0", gamma)
    while s.t < tend - 1e-13:
        dt = min(stable_dt(s, cfg.scheme), tend - s.t)
        s, info = advance(s, cfg.scheme, spec.bc, dt)
        nsteps += 1
        for k in fallbacks:
            fallbacks[k] += info["fallbacks"][k]
        w = st.cons_to_prim(grid.interior(s.avg), gamma, check=False)
        min_rho = min(min_rho, float(w[..., 0].min()))
        min_p = min(min_p, float(w[..., 3].min()))
        if cfg.out_dir and cfg.output_every and nsteps % cfg.output_every == 0:
            write_fields(s, cfg.out_dir, "step%06d" % nsteps, gamma)
    wall = time.perf_counter() - wall0
    drift = _totals(s) - tot0
    scale = np.maximum(np.abs(tot0), 1e-300)
    summary = {
        "problem": cfg.problem,
        "nx": grid.nx,
        "ny": grid.ny,
        "tend": tend,
        "steps": nsteps,
        "min_rho": min_rho,
        "min_p": min_p,
        "conservation_drift": [float(d) for d in drift],
        "conservation_drift_rel": [float(d) for d in drift / scale],
        "fallbacks": fallbacks,
        "wall_time_s": round(wall, 3),
    }
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_fields(s, cfg.out_dir, "final", gamma)
        with open(out / "summary.json", "w") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
        if cfg.checkpoints:
            save_checkpoint(s, out / "final.ckpt")
    return s, summary


VARIANTS = ("with_correction", "without_correction", "simplified")


def _variant_scheme(base: SchemeConfig, variant):
    if variant == "with_correction":
        return base
    if variant == "without_correction":
        return replace(base, correction=False)
    if variant == "simplified":
        return replace(base, strategy="simplified")
    raise ValueError("unknown variant %r" % variant)


@dataclass
class ConvergenceReport:
    problem: str
    resolutions: list
    variants: list
    errors: dict  # variant -> list of L1(rho) errors, one per resolution
    eocs: dict    # variant -> list (first entry None)
    metadata: dict


def convergence_study(problem, resolutions, variants=("with_correction",),
                      scheme=None, tend=None):
    """Errors and EOC on a doubling ladder, per variant.

    Each resolution's error is measured against the next-finer run (2x
    cells in both directions); problems that return to their initial
    data compare against it directly, so no extra fine run is needed.
    """
    spec = pb.make_problem(problem)
    res = list(resolutions)
    if any(b != 2 * a for a, b in zip(res, res[1:])):
        raise ValueError("resolutions must double: %r" % res)
    base = scheme if scheme is not None else SchemeConfig(
        bound_preserving=False, shock_indicator=False, transonic_fix=False
    )
    self_ref = spec.reference == "self_at_integer_times"
    run_res = res if self_ref else res + [2 * res[-1]]
    errors = {}
    for variant in variants:
        vs = _variant_scheme(base, variant)
        states = []
        for n in run_res:
            cfg = RunConfig(problem, n, tend=tend, scheme=vs)
            s, _ = run_case(cfg)
            states.append(s)
        errs = []
        for i, n in enumerate(res):
            finer = None if self_ref else states[i + 1]
            errs.append(float(reference_rho_error(states[i], spec, finer)))
        errors[variant] = errs
    eocs = {
        v: [None] + [float(np.log2(e[i] / e[i + 1])) for i in range(len(e) - 1)]
        for v, e in errors.items()
    }
    meta = {"tend": tend if tend is not None else spec.tend,
            "strategy": base.strategy, "correction": base.correction}
    return ConvergenceReport(problem, res, list(variants), errors, eocs, meta)


def reference_rho_error(s, spec, finer):
    return pb.reference_error(s, spec, finer)[0]


def emit_table(report: ConvergenceReport):
    """Aligned text table plus CSV lines (resolution,error_rho,eoc)."""
    lines = []
    head = ["cells"]
    for v in report.variants:
        head += ["L1(rho) %s" % v, "EOC"]
    lines.append("  ".join("%-22s" % h for h in head).rstrip())
    for i, n in enumerate(report.resolutions):
        row = ["%-22d" % n]
        for v in report.variants:
            e = report.errors[v][i]
            q = report.eocs[v][i]
            row.append("%-22s" % ("%.6e" % e))
            row.append("%-22s" % ("" if q is None else "%.2f" % q))
        lines.append("  ".join(row).rstrip())
    text = "\n".join(lines)
    csv_lines = ["variant,resolution,error_rho,eoc"]
    for v in report.variants:
        for i, n in enumerate(report.resolutions):
            q = report.eocs[v][i]
            csv_lines.append(
                "%s,%d,%.6e,%s" % (v, n, report.errors[v][i],
                                   "" if q is None else "%.2f" % q)
            )
    return text, "\n".join(csv_lines) + "\n"


def _scheme_from_args(args):
    limiter = getattr(args, "limiter", "bound+shock")
    return SchemeConfig(
        cfl=args.cfl,
        strategy=args.strategy,
        correction=args.correction == "on",
        bound_preserving=limiter in ("bound", "bound+shock"),
        shock_indicator=limiter == "bound+shock",
        transonic_fix=getattr(args, "transonic_fix", "on") == "on",
    )


def _check_size(nx, ny, large):
    if max(nx, ny or 0) > LARGE_LIMIT and not large:
        raise ValueError(
            "resolution above %d requires --large (long-running)" % LARGE_LIMIT
        )


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="activeflux",
        description="Third-order solver for the 2D compressible Euler equations",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    rp = sub.add_parser("run", help="run one configuration")
    rp.add_argument("--problem", required=True)
    rp.add_argument("--nx", type=int, required=True)
    rp.add_argument("--ny", type=int, default=None)
    rp.add_argument("--tend", type=float, default=None)
    rp.add_argument("--cfl", type=float, default=0.27)
    rp.add_argument("--strategy", default="neighbor_avg",
                    choices=("nested", "simplified", "neighbor_avg"))
    rp.add_argument("--limiter", default="bound+shock",
                    choices=("none", "bound", "bound+shock"))
    rp.add_argument("--correction", default="on", choices=("on", "off"))
    rp.add_argument("--transonic-fix", dest="transonic_fix", default="on",
                    choices=("on", "off"))
    rp.add_argument("--out", default=None)
    rp.add_argument("--output-every", type=int, default=0)
    rp.add_argument("--checkpoint", action="store_true")
    rp.add_argument("--large", action="store_true")

    cp = sub.add_parser("converge", help="run a convergence ladder")
    cp.add_argument("--problem", required=True)
    cp.add_argument("--levels", required=True,
                    help="comma-separated doubling resolutions, e.g. 32,64,128")
    cp.add_argument("--variants", default="with_correction",
                    help="comma-separated subset of: %s" % ",".join(VARIANTS))
    cp.add_argument("--tend", type=float, default=None)
    cp.add_argument("--cfl", type=float, default=0.27)
    cp.add_argument("--strategy", default="neighbor_avg",
                    choices=("nested", "simplified", "neighbor_avg"))
    cp.add_argument("--out", default=None)
    cp.add_argument("--large", action="store_true")

    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "run":
            _check_size(args.nx, args.ny, args.large)
            cfg = RunConfig(
                args.problem, args.nx, args.ny, args.tend,
                scheme=_scheme_from_args(args),
                out_dir=args.out, output_every=args.output_every,
                checkpoints=args.checkpoint,
            )
            _, summary = run_case(cfg)
            print(json.dumps(summary, indent=2, sort_keys=True))
            return 0
        levels = [int(v) for v in args.levels.split(",")]
        variants = [v.strip() for v in args.variants.split(",")]
        for v in variants:
            if v not in VARIANTS:
                raise ValueError("unknown variant %r" % v)
        _check_size(max(levels) * 2, None, args.large)
        scheme = SchemeConfig(
            cfl=args.cfl, strategy=args.strategy,
            bound_preserving=False, shock_indicator=False, transonic_fix=False,
        )
        report = convergence_study(
            args.problem, levels, variants, scheme=scheme, tend=args.tend
        )
        text, csv = emit_table(report)
        print(text)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / ("convergence_%s.csv" % report.problem)).write_text(csv)
        return 0
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except ActiveFluxError as exc:
        print("solver error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
