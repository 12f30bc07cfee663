import math

import numpy as np
import pytest

import sonic_ep as se


def test_transform_round_trip():
    rho = np.linspace(1.0, 10.0, 1001)
    w = se.F(rho)
    assert np.max(np.abs(se.f(w) - rho)) <= 1e-12
    assert se.F(1.0) == pytest.approx(0.5)
    assert se.f(0.5) == 1.0
    with pytest.raises(ValueError):
        se.f(0.4)


def test_solve_canonical():
    b = se.DopingProfile.constant(2.0)
    sol = se.solve_steady(se.SolverConfig(n=256), b)
    assert sol.converged
    assert sol.rho[0] == 1.0 and sol.rho[-1] == 1.0
    assert np.all(sol.rho >= 1.0) and np.all(sol.rho <= 2.0)
    assert len(sol.x) == 257
    assert sol.final_residual <= 1e-12


def test_algorithms_agree():
    b = se.DopingProfile.constant(2.0)
    p = se.solve_steady(se.SolverConfig(n=256), b)
    q = se.solve_steady(se.SolverConfig(n=256, algorithm=se.Algorithm.newton), b)
    assert np.max(np.abs(p.rho - q.rho)) <= 1e-9


def test_right_endpoint_exponent_and_slope():
    b = se.DopingProfile.constant(2.0)
    sol = se.solve_steady(se.SolverConfig(n=2048, algorithm=se.Algorithm.newton), b)
    fit = se.fit_boundary_exponent(sol, se.Endpoint.right)
    assert 0.45 <= fit.beta <= 0.55
    assert se.endpoint_slope(sol, se.Endpoint.right) < 0.0
    assert se.barrier_check(sol, b).m_empirical > 0.0


def test_synthetic_fields():
    x = se.Grid.clustered(512).nodes
    rho = 1.0 + np.sqrt(1.0 - x)
    sol = se.solution_from_fields(x, rho, se.F(rho))
    fit = se.fit_boundary_exponent(sol, se.Endpoint.right, (1e-4, 0.05))
    assert fit.beta == pytest.approx(0.5, abs=1e-3)
    assert se.holder_seminorm(sol, 0.5) == pytest.approx(1.0, rel=1e-12)


def test_config_parsing_and_digest():
    a = se.parse_config("tau = 1\ngrid.n = 64\n")
    b = se.parse_config("grid.n=64 # same\ntau = 1.0\n")
    assert se.config_digest(a) == se.config_digest(b)
    assert "grid.n = 64" in se.canonical_config(a)
    with pytest.raises(se.InvalidInput):
        se.parse_config("speed = 3\n")


def test_invalid_doping_rejected():
    with pytest.raises(ValueError):
        se.solve_steady(se.SolverConfig(n=64), se.DopingProfile.constant(0.9))


def test_non_convergence_carries_history():
    b = se.DopingProfile.constant(2.0)
    with pytest.raises(se.ConvergenceError) as info:
        se.solve_steady(se.SolverConfig(n=128, max_iter=1), b)
    assert len(info.value.residual_history) >= 1
    assert isinstance(info.value, RuntimeError)


def test_tau_sweep_order():
    b = se.DopingProfile.constant(2.0)
    rows = se.tau_sweep(b, [10.0, 1.0], se.SolverConfig(n=256))
    assert [r.tau for r in rows] == [10.0, 1.0]
    assert all(r.slope_w_right < 0.0 for r in rows)
    assert not math.isnan(rows[0].beta_right)
