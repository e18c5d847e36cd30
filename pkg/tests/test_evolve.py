import numpy as np
import pytest

from stringlab import (BlowupDetected, DataFamily, Grid1D, HyperbolicityLoss,
                       ProfileSpec, blowup_fixture, exact_travelling,
                       exact_travelling_fields, init_state, rhs, run_evolution, step,
                       trace_characteristics)
from stringlab.evolve import FieldState, max_speed
from stringlab.stencils import cubic_interp, deriv1


def _state(grid, phi, w, p, t=0.0):
    return FieldState(t=t, grid=grid, phi=phi, w=w, p=p)


def test_grid_invariants():
    with pytest.raises(ValueError):
        Grid1D(0.0, -0.1, 100)
    with pytest.raises(ValueError):
        Grid1D(0.0, 0.1, 8)
    g = Grid1D(-1.0, 0.5, 17)
    assert g.x[0] == -1.0 and g.x[-1] == pytest.approx(7.0)
    r = g.refined()
    assert r.n == 33 and r.x_end == pytest.approx(g.x_end)


def test_deriv1_is_fourth_order():
    errs = []
    for n in (65, 129):
        x = np.linspace(-1.0, 1.0, n)
        err = np.max(np.abs(deriv1(np.sin(3 * x), x[1] - x[0]) - 3 * np.cos(3 * x)))
        errs.append(err)
    assert np.log2(errs[0] / errs[1]) > 3.5


def test_cubic_interp_cubic_exact():
    x0, dx, n = -2.0, 0.25, 33
    xg = x0 + dx * np.arange(n)
    vals = xg ** 3 - 2 * xg + 1
    xq = np.linspace(-1.5, 1.5, 57)
    out = cubic_interp(vals, x0, dx, xq)
    assert np.allclose(out, xq ** 3 - 2 * xq + 1, atol=1e-12)


def test_init_state_zero_family():
    fam = DataFamily(0.5, 0.0, ProfileSpec("gaussian", 0.0), ProfileSpec("gaussian", 0.0))
    st = init_state(fam, Grid1D(-10, 0.1, 201))
    assert np.all(st.phi == 0) and np.all(st.w == 0) and np.all(st.p == 0)


def test_init_state_travelling_null(travelling_family):
    st = init_state(travelling_family, Grid1D(-20, 0.1, 401))
    assert np.max(np.abs(st.lphi)) < 1e-15


def test_init_state_rejects_superluminal():
    fam = DataFamily(0.5, 1.0, ProfileSpec("gaussian", 1.5, 0.0, 1.0),
                     ProfileSpec("gaussian", 1.5, 0.0, 1.0))
    # F' = 0, G = 1.5 gaussian: 1 + p^2 - w^2 < 0 at the center
    with pytest.raises(HyperbolicityLoss):
        init_state(fam, Grid1D(-16, 0.1, 321))


def test_compatibility_residual_refines(travelling_family):
    res = []
    for n in (257, 513):
        grid = Grid1D(-16, 32 / (n - 1), n)
        res.append(init_state(travelling_family, grid).compatibility_residual())
    assert np.log2(res[0] / res[1]) > 3.5


def test_rhs_zero_and_constant_states():
    grid = Grid1D(-5, 0.1, 101)
    z = np.zeros(grid.n)
    dphi, dw, dp = rhs(_state(grid, z, z, z))
    assert np.all(dphi == 0) and np.all(dw == 0) and np.all(dp == 0)
    c = 0.3 * np.ones(grid.n)
    dphi, dw, dp = rhs(_state(grid, z, c, z))
    assert np.allclose(dw, 0, atol=1e-14) and np.allclose(dp, 0, atol=1e-14)
    assert np.allclose(dphi, 0.3)


def test_rhs_manufactured_wave():
    # phi = sin(x - t): dt(w) should reproduce -sin(x - t) up to stencil error
    errs = []
    for n in (201, 401):
        grid = Grid1D(-2 * np.pi, 4 * np.pi / (n - 1), n)
        x = grid.x
        st = _state(grid, np.sin(x), -np.cos(x), np.cos(x))
        _, dw, dp = rhs(st)
        errs.append(np.max(np.abs(dw - (-np.sin(x)))))
        assert np.allclose(dp, np.sin(x), atol=errs[-1] * 2 + 1e-12)
    assert np.log2(errs[0] / errs[1]) > 3.3


def test_step_zero_stays_zero():
    grid = Grid1D(-5, 0.1, 101)
    z = np.zeros(grid.n)
    st = _state(grid, z, z, z)
    for _ in range(20):
        st = step(st, dt=0.02)
    assert np.all(st.w == 0) and np.all(st.p == 0) and np.all(st.phi == 0)


def test_constant_states_are_fixed_points():
    grid = Grid1D(-5, 0.1, 101)
    z = np.zeros(grid.n)
    st = _state(grid, z, 0.4 * np.ones(grid.n), 0.2 * np.ones(grid.n))
    out = step(st, dt=0.02, eps_ko=0.01)
    assert np.allclose(out.w, 0.4, atol=1e-13)
    assert np.allclose(out.p, 0.2, atol=1e-13)


def test_time_reversal_roundtrip(default_family):
    grid = Grid1D(-24, 0.05, 961)
    st = init_state(default_family, grid)
    dt = 0.02
    fwd = step(st, dt=dt, eps_ko=0.0)
    back = step(fwd, dt=-dt, eps_ko=0.0)
    assert np.max(np.abs(back.w - st.w)) < 10 * dt ** 5
    assert np.max(np.abs(back.p - st.p)) < 10 * dt ** 5


def test_reflection_symmetry(default_family):
    # x -> -x, p -> -p maps solutions to solutions; the solver commutes with
    # the reflection to roundoff
    grid = Grid1D(-24, 0.1, 481)
    st = init_state(default_family, grid)
    refl = FieldState(t=0.0, grid=grid, phi=st.phi[::-1].copy(),
                      w=st.w[::-1].copy(), p=-st.p[::-1].copy())
    a = step(st, dt=0.03)
    b = step(refl, dt=0.03)
    assert np.max(np.abs(b.w - a.w[::-1])) < 1e-13
    assert np.max(np.abs(b.p + a.p[::-1])) < 1e-13


def test_travelling_wave_convergence(travelling_family):
    errs = []
    for n in (257, 513, 1025):
        grid = Grid1D(-18, 36 / (n - 1), n)
        res = run_evolution(travelling_family, grid, t_end=4.0)
        assert res.status == "completed"
        errs.append(np.max(np.abs(res.state.phi
                                  - exact_travelling(travelling_family, 4.0, grid.x))))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders > 3.3)


def test_exact_travelling_fields(travelling_family):
    x = np.linspace(-5, 5, 41)
    phi, w, p = exact_travelling_fields(travelling_family, 1.5, x)
    assert np.allclose(w + p, 0.0, atol=1e-15)
    assert np.allclose(phi, exact_travelling(travelling_family, 1.5, x))


def test_exact_travelling_rejects_nonzero_delta(default_family):
    with pytest.raises(ValueError):
        exact_travelling(default_family, 1.0, 0.0)


def test_speed_bound_on_run(default_family):
    grid = Grid1D(-28, 0.1, 561)
    res = run_evolution(default_family, grid, t_end=5.0)
    assert res.max_speed_seen <= 1.0 + 1e-12


def test_blowup_detection_and_reporting():
    fam = blowup_fixture()
    res = run_evolution(fam, Grid1D(-16, 0.05, 641), t_end=10.0)
    assert res.status == "blowup"
    assert res.t_blowup is not None and 3.0 < res.t_blowup < 5.0
    assert res.blowup_reason


def test_step_raises_blowup_with_last_valid_time():
    fam = blowup_fixture()
    grid = Grid1D(-16, 0.05, 641)
    st = init_state(fam, grid)
    with pytest.raises(BlowupDetected) as exc_info:
        for _ in range(10000):
            st = step(st, dt=0.02)
    assert exc_info.value.t_last == pytest.approx(st.t)


def test_characteristics_straight_on_zero_field():
    grid = Grid1D(-10, 0.05, 401)
    z = np.zeros(grid.n)
    st = _state(grid, z, z, z)
    res = run_evolution(st, t_end=3.0, store_history=True)
    paths, min_sep = trace_characteristics(res, [-4.0, -2.0, 0.0], family="plus")
    for p in paths:
        assert np.allclose(p.xs, p.seed_x + p.ts, atol=1e-12)
    assert min_sep == pytest.approx(2.0, abs=1e-12)
    paths, _ = trace_characteristics(res, [0.0], family="minus")
    assert np.allclose(paths[0].xs, -paths[0].ts, atol=1e-12)


def test_characteristics_early_speed_delta_zero(travelling_family):
    # plus-family speed field is exactly 1 on delta = 0 data
    grid = Grid1D(-20, 0.05, 801)
    res = run_evolution(travelling_family, grid, t_end=2.0, store_history=True)
    paths, _ = trace_characteristics(res, [-3.0, 0.0, 3.0], family="plus")
    for p in paths:
        slope = (p.xs[-1] - p.xs[0]) / (p.ts[-1] - p.ts[0])
        assert slope == pytest.approx(1.0, abs=1e-7)


def test_nested_domain_causality(default_family):
    dx = 0.1
    big = Grid1D(-40.0, dx, 801)
    small = Grid1D(-25.0, dx, 501)
    rb = run_evolution(default_family, big, t_end=5.0)
    rs = run_evolution(default_family, small, t_end=5.0)
    mask = np.abs(small.x) <= 25.0 - 7.0
    off = int(round((small.x0 - big.x0) / dx))
    idx = np.arange(small.n)[mask] + off
    for fa, fb in ((rs.state.w, rb.state.w), (rs.state.p, rb.state.p)):
        assert np.max(np.abs(fa[mask] - fb[idx])) < 1e-9


def test_max_speed_helper():
    assert max_speed(np.zeros(4), np.zeros(4)) == pytest.approx(1.0)
    with pytest.raises(HyperbolicityLoss):
        max_speed(np.array([1.2]), np.array([0.0]))
