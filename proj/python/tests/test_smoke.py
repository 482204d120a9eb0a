import math

import numpy as np
import pytest

import tcur


def sine_problem(grid):
    x = np.array(grid.centers())
    u = np.broadcast_to(0.5 + 0.25 * np.sin(2 * np.pi * x), grid.shape).copy()
    rho0 = 1.0 + 0.5 * np.cos(2 * np.pi * x)
    return u, rho0


def test_grid_shape():
    g = tcur.Grid(2, 16, 8)
    assert g.shape == (8, 16, 16)
    assert g.h == pytest.approx(1 / 16)
    assert g.times()[0] == 0.0
    with pytest.raises(ValueError):
        tcur.Grid(1, 16, 2)


def test_mollify_preserves_constants_and_rejects_fine_delta():
    g = tcur.Grid(1, 64, 8)
    f = np.full(g.shape, 2.5)
    np.testing.assert_allclose(tcur.mollify(g, f, 0.1), f, atol=1e-14)
    with pytest.raises(ValueError, match="under-resolved"):
        tcur.mollify(g, f, 0.01)
    with pytest.raises(ValueError):
        tcur.mollify(g, np.zeros((3, 3)), 0.1)


def test_even_kernel_has_vanishing_first_moment():
    g = tcur.Grid(1, 256, 8)
    assert tcur.kernel_moment(g, 0.1, 0)[0] == pytest.approx(1.0, abs=1e-14)
    assert abs(tcur.kernel_moment(g, 0.1, 1)[0]) <= 1e-13
    assert abs(tcur.kernel_moment(g, 0.1, 1, kernel="skewed")[0]) > 1e-3


def test_finite_volume_conserves_mass():
    g = tcur.Grid(1, 128, 128)
    u, rho0 = sine_problem(g)
    rho = tcur.solve_continuity(g, [u], rho0, scheme="finite-volume")
    assert rho.shape == g.shape
    np.testing.assert_allclose(rho.mean(axis=1), rho0.mean(), atol=1e-13)
    np.testing.assert_allclose(rho[0], rho0)


def test_constant_velocity_commutator_vanishes():
    g = tcur.Grid(1, 128, 8)
    x = np.array(g.centers())
    rho = np.broadcast_to(np.sin(2 * np.pi * x) + 0.3 * np.cos(6 * np.pi * x), g.shape).copy()
    u = np.full(g.shape, 0.7)
    assert np.abs(tcur.commutator(g, [u], rho, 0.1)).max() <= 1e-12
    rep = tcur.commutator_sweep(g, [u], rho, [0.2, 0.1, 0.05])
    assert rep["vanishing"] and rep["fitted_rate"] is None


def test_commutator_sweep_decreases_on_smooth_data():
    g = tcur.Grid(1, 256, 32)
    u, rho0 = sine_problem(g)
    rho = tcur.solve_continuity(g, [u], rho0)
    rep = tcur.commutator_sweep(g, [u], rho, [0.2, 0.1, 0.05, 0.025])
    assert rep["monotone"]
    assert rep["fitted_rate"] >= 0.8


def test_horizontal_current_and_boundary_round_trip():
    g = tcur.Grid(1, 32, 32)
    t = np.array(g.times())[:, None]
    x = np.array(g.centers())[None, :]
    dens = (1.0 + 2.0 * t) * np.cos(2 * np.pi * x)
    f_t = tcur.horizontal_from_boundary(g, dens)
    zero = np.zeros(g.shape)
    assert tcur.mass(g, f_t, [zero]) <= np.abs(dens).mean()
    assert tcur.vertical_mass(g, f_t, [zero]) == 0.0
    interior, surface = tcur.boundary(g, f_t, [zero])
    np.testing.assert_allclose(interior, dens, atol=1e-8)
    assert np.all(surface == 0.0)


def test_flat_norm_of_null_boundary_current_below_vertical_mass():
    g = tcur.Grid(1, 16, 16)
    t = np.array(g.times())[:, None]
    x = np.array(g.centers())[None, :]
    F = t * (1 - t) * (np.sin(2 * np.pi * x) + 0.5 * np.cos(4 * np.pi * x))
    f_t, f_vec = tcur.boundary_of_two_current(g, [F])
    cert = tcur.flat_norm(g, f_t, f_vec)
    assert cert["converged"]
    assert cert["relative_gap"] <= 1e-6
    assert cert["value"] <= tcur.vertical_mass(g, f_t, f_vec) * (1 + 1e-6)
    np.testing.assert_allclose(tcur.primitive_two_current(g, f_t, f_vec)[0], F, atol=1e-12)


def test_uniqueness_bounds_identical_inputs_are_zero():
    g = tcur.Grid(1, 64, 64)
    u, rho0 = sine_problem(g)
    rho = tcur.solve_continuity(g, [u], rho0)
    res = tcur.uniqueness_bounds(g, rho, rho, [u], [0.2, 0.1])
    assert res["min_total"] == 0.0
    assert len(res["rows"]) == 2


def test_uniqueness_bounds_between_schemes_are_positive():
    g = tcur.Grid(1, 64, 64)
    u, rho0 = sine_problem(g)
    sl = tcur.solve_continuity(g, [u], rho0)
    fv = tcur.solve_continuity(g, [u], rho0, scheme="finite-volume")
    res = tcur.uniqueness_bounds(g, sl, fv, [u], [0.2, 0.1])
    assert 0.0 < res["min_total"] < math.inf
    assert res["min_total"] == min(r["total"] for r in res["rows"])


def test_straightening_defect_is_small():
    g = tcur.Grid(1, 128, 128)
    u, rho0 = sine_problem(g)
    rho = tcur.solve_continuity(g, [u], rho0)
    defect, total = tcur.straightening_defect(g, [u], rho, 0.1)
    assert defect <= 1e-3 * total


def test_run_experiment_is_deterministic_and_validates():
    cfg = {"schema_version": 1, "seed": 3, "grid": {"dim": 1, "n": 8, "n_t": 8}, "instances": 2}
    a, ok = tcur.run_experiment("null-boundary-check", cfg)
    b, _ = tcur.run_experiment("null-boundary-check", cfg)
    assert ok and a == b
    assert a["command"] == "null-boundary-check"
    assert "null-boundary-check" in tcur.commands()
    with pytest.raises(ValueError, match="config"):
        tcur.run_experiment("null-boundary-check", dict(cfg, bogus=1))


def test_numerical_error_type():
    assert issubclass(tcur.NumericalError, ArithmeticError)
    g = tcur.Grid(1, 256, 16)
    x = np.array(g.centers())
    u = np.full(g.shape, 2.0)
    with pytest.raises(tcur.NumericalError, match="CFL"):
        tcur.solve_continuity(g, [u], 1.0 + 0.5 * np.cos(2 * np.pi * x), scheme="finite-volume")
