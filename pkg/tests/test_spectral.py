import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from backflow.dynamics import flux_backflow
from backflow.errors import ExtrapolationError, InvalidArgumentError
from backflow.spectral import (assemble, cutoff_sensitivity, export_optimal_state, extrapolate_bound,
                               kernel_entry, max_eigenvalue, panel_order, solve_backflow)

P = 0.0384517


def test_kernel_diagonal():
    assert kernel_entry(1.0, 1.0) == pytest.approx(-2 / math.pi, rel=1e-15)
    assert kernel_entry(0.0, 0.0) == 0.0


def test_kernel_closed_form_value():
    # -sin(1 - 4) / (pi * (1 - 2)), evaluated by hand
    assert kernel_entry(1.0, 2.0) == pytest.approx(-0.04491989370379195, rel=1e-14)


def test_kernel_negative_argument():
    with pytest.raises(InvalidArgumentError):
        kernel_entry(-1.0, 2.0)


@given(u=st.floats(0, 50), v=st.floats(0, 50))
def test_kernel_symmetric(u, v):
    assert kernel_entry(u, v) == kernel_entry(v, u)


@given(u=st.floats(0.01, 30), eps=st.floats(1e-12, 1e-6))
def test_kernel_continuous_at_diagonal(u, eps):
    assert kernel_entry(u, u + eps) == pytest.approx(-2 * u / math.pi, abs=1e-5)


def test_two_point_matrix():
    km = assemble(2, 3.0)
    assert np.array_equal(km.matrix, km.matrix.T)
    np.testing.assert_allclose(np.diag(km.matrix), -2 * km.nodes / math.pi * km.weights, rtol=1e-15)


def test_diagonal_hand_matrix():
    lam, vec = max_eigenvalue(np.array([[2.0, 0.0], [0.0, 1.0]]))
    assert lam == pytest.approx(2.0)
    np.testing.assert_allclose(np.abs(vec), [1.0, 0.0], atol=1e-15)


def test_coarse_bracket():
    lam, _ = max_eigenvalue(assemble(200, 10.0))
    assert 0.0 < lam < 0.05


def test_dense_and_power_agree():
    km = assemble(200, 10.0)
    a, va = max_eigenvalue(km, "dense")
    b, vb = max_eigenvalue(km, "power")
    assert abs(a - b) <= 1e-9
    np.testing.assert_allclose(va, vb, atol=1e-6)


def test_residual_contract():
    km = assemble(300, 15.0)
    for method in ("dense", "power"):
        lam, vec = max_eigenvalue(km, method)
        assert np.linalg.norm(km.matrix @ vec - lam * vec) <= 1e-10 * np.linalg.norm(km.matrix, 2)


def test_entries_finite_at_large_n():
    km = assemble(4000, 40.0)
    assert np.all(np.isfinite(km.matrix))
    assert np.array_equal(km.matrix, km.matrix.T)


def test_deterministic():
    a = solve_backflow(300, 15.0)
    b = solve_backflow(300, 15.0)
    assert a.eigenvalue == b.eigenvalue
    assert np.array_equal(a.eigenvector, b.eigenvector)


def test_k_max_30_estimate():
    sol = solve_backflow(1000, 30.0)
    assert abs(sol.eigenvalue - P) <= 5e-3
    assert 0 < sol.eigenvalue < 1


def test_eigenvector_normalized(coarse_solution):
    s = coarse_solution
    assert s.weights @ s.eigenvector**2 == pytest.approx(1.0, abs=1e-12)


def test_panel_order():
    assert panel_order(1000) == 10
    assert panel_order(2) == 2
    assert panel_order(7) == 1


def test_export_reproduces_eigenvalue(coarse_solution):
    state = export_optimal_state(coarse_solution)
    assert state.norm() == pytest.approx(1.0, abs=1e-10)
    assert flux_backflow(state, 0.0, 1.0) == pytest.approx(coarse_solution.eigenvalue, abs=1e-9)


@pytest.mark.parametrize("duration", [0.25, 4.0])
def test_export_other_durations(coarse_solution, duration):
    state = export_optimal_state(coarse_solution, duration)
    assert flux_backflow(state, 0.0, duration) == pytest.approx(coarse_solution.eigenvalue, abs=1e-9)


def test_extrapolation_geometric():
    # lambda_N = L - c / N^2 on a doubling schedule
    vals = [P - 1.0 / n**2 for n in (10, 20, 40)]
    est = extrapolate_bound(vals)
    assert est.value == pytest.approx(P, abs=1e-12)
    assert not est.converged


def test_extrapolation_converged_sequence():
    est = extrapolate_bound([0.0374, 0.0376130, 0.0376128])
    assert est.converged and est.value == 0.0376128


def test_extrapolation_rejects_erratic_sequence():
    with pytest.raises(ExtrapolationError) as info:
        extrapolate_bound([0.030, 0.036, 0.031])
    assert len(info.value.raw) == 3


def test_extrapolation_needs_three():
    with pytest.raises(InvalidArgumentError):
        extrapolate_bound([0.03, 0.035])


def test_cutoff_sensitivity(coarse_solution):
    half = solve_backflow(200, 10.0)
    rep = cutoff_sensitivity(coarse_solution, half)
    assert rep["change"] == pytest.approx(coarse_solution.eigenvalue - half.eigenvalue)
    assert rep["change"] > 0
