"""Problem catalog: initial data, grids and reference errors."""

import numpy as np
import pytest

from activeflux import problems as pb
from activeflux import state as st
from activeflux.errors import GridMismatch, UnknownProblem


def test_catalog_names():
    for name in ("ex1", "vortex", "transonic_rarefaction", "double_rarefaction",
                 "transonic_shock", "rp_f", "rp_e", "rp_j", "rp_3", "rp_4",
                 "kelvin_helmholtz", "shock_reflection"):
        assert name in pb.PROBLEM_NAMES
    with pytest.raises(UnknownProblem):
        pb.make_problem("nope")


def test_grids_match_domains():
    spec = pb.make_problem("ex1")
    g = spec.grid(32)
    assert (g.nx, g.ny) == (32, 8)
    assert g.dx == pytest.approx(1.0 / 32)
    assert g.dy == pytest.approx(0.5 / 8)
    spec = pb.make_problem("transonic_rarefaction")
    g = spec.grid(256)
    assert g.x0 == -1.5 and g.dx == pytest.approx(2.0 / 256)
    spec = pb.make_problem("vortex")
    g = spec.grid(64)
    assert (g.nx, g.ny) == (64, 64)


def test_ex1_profile():
    w = pb.make_problem("ex1").init(np.array([0.5, 0.0]), 0.2)
    assert w[0, 0] == pytest.approx(1.5)
    assert w[1, 0] == pytest.approx(1.0 + 0.5 * np.exp(-20.0))
    assert np.allclose(w[:, 1:3], 0.0)
    assert np.allclose(w[:, 3], w[:, 0])  # p = rho for this profile


def test_vortex_profile():
    init = pb.make_problem("vortex").init
    center = init(0.5, 0.5)
    assert center[0] == pytest.approx(1.0)  # rho = 0.5 + 0.5
    assert center[1] == pytest.approx(1.0) and center[2] == pytest.approx(1.0)
    # pressure deficit at the core balances the swirl; ambient is 0.1
    assert 0.0 < center[3] < 0.1
    outside = init(0.95, 0.5)
    assert np.allclose(outside, [0.5, 1.0, 1.0, 0.1])
    # continuity at the vortex rim r = 1
    just_in = init(0.5 + 0.4 - 1e-9, 0.5)
    assert np.allclose(just_in, outside, atol=1e-6)
    # azimuthal speed peaks at r = 1/2 with value 1024/2^12 = 0.25
    at_half = init(0.5 + 0.2, 0.5)
    assert at_half[2] - 1.0 == pytest.approx(0.25, rel=1e-12)


def test_piecewise_interface_state():
    spec = pb.make_problem("transonic_rarefaction")
    w = spec.init(np.array([-1.0, 0.0, 0.25]), 0.1)
    assert np.allclose(w[0], [0.1, -2.0, 0.0, 0.1])
    assert np.allclose(w[1], [0.55, -1.5, 0.0, 0.55])  # printed interface state
    assert np.allclose(w[2], [1.0, -1.0, 0.0, 1.0])


def test_quadrant_states():
    spec = pb.make_problem("rp_f")
    init = spec.init
    assert np.allclose(init(0.75, 0.75), [0.5313, 0.0, 0.0, 0.4])
    assert np.allclose(init(0.25, 0.75), [1.0, 0.7276, 0.0, 1.0])
    assert np.allclose(init(0.25, 0.25), [0.8, 0.0, 0.0, 1.0])
    assert np.allclose(init(0.75, 0.25), [1.0, 0.0, 0.7276, 1.0])
    # interface points take the lower-index quadrant
    assert np.allclose(init(0.5, 0.75), [1.0, 0.7276, 0.0, 1.0])


def test_transonic_shock_rankine_hugoniot():
    spec = pb.make_problem("transonic_shock")
    wl = spec.init(-0.25, 0.1)
    wr = spec.init(0.25, 0.1)
    gamma = st.GAMMA
    # exact jump conditions for a shock moving at the catalog speed
    ql, qr = st.prim_to_cons(wl, gamma), st.prim_to_cons(wr, gamma)

    def fx(q):
        rho, mx, my, E = q
        u = mx / rho
        p = (gamma - 1.0) * (E - 0.5 * (mx * mx + my * my) / rho)
        return np.array([mx, mx * u + p, my * u, u * (E + p)])

    s = pb._TRANSONIC_SHOCK_S
    assert np.allclose(fx(ql) - fx(qr), s * (ql - qr), atol=1e-12)
    cl = st.sound_speed(wl)
    cr = st.sound_speed(wr)
    assert wl[1] - cl > 0 > wr[1] - cr  # transonic for the u-c family


def test_initialize_simpson_consistency():
    spec = pb.make_problem("vortex")
    g = spec.grid(16)
    s = pb.initialize(spec, g)
    centers = st.centers_from_state(s)
    avg = st.simpson_cell_average(s.pvv, s.pvx, s.pvy, centers)
    assert np.allclose(avg, s.avg, atol=1e-13)


def test_all_initial_data_admissible():
    for name in pb.PROBLEM_NAMES:
        spec = pb.make_problem(name)
        g = spec.grid(16, 16 if spec.default_ny is None else 8)
        s = pb.initialize(spec, g)
        w = st.cons_to_prim(s.pvv)
        assert np.all(w[..., 0] > 0) and np.all(w[..., 3] > 0), name


def test_restrict_and_reference_error():
    spec = pb.make_problem("ex1")
    g = spec.grid(16)
    gf = spec.grid(32)  # 1D profile keeps ny = 8
    s = pb.initialize(spec, g)
    sf = pb.initialize(spec, gf)
    r = pb.restrict_averages(sf, fy=1)
    assert r.shape == (16, 8, 4)
    err = pb.reference_error(s, spec, sf)
    assert err.shape == (4,)
    assert np.all(err >= 0) and err[0] < 1e-4  # restriction of smooth data
    # trivial case: identical states give zero error
    spec_v = pb.make_problem("vortex")
    gv = spec_v.grid(16)
    sv = pb.initialize(spec_v, gv)
    assert np.allclose(pb.reference_error(sv, spec_v, None), 0.0, atol=1e-15)


def test_reference_error_grid_mismatch():
    spec = pb.make_problem("ex1")
    s = pb.initialize(spec, spec.grid(16))
    with pytest.raises(GridMismatch):
        pb.reference_error(s, spec, None)  # ex1 needs a finer run
    bad = pb.initialize(spec, spec.grid(48))
    with pytest.raises(GridMismatch):
        pb.reference_error(s, spec, bad)
