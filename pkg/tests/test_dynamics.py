import math

import numpy as np
import pytest
from scipy.special import erfc

from backflow.dynamics import (PositionGridSpec, auto_position_grid, backflow_amount, current_at, evolve,
                               flux_backflow, left_probability, left_probability_rate, left_probability_series,
                               probability_current, propagate, right_probability)
from backflow.errors import InvalidArgumentError, TruncationError
from backflow.states import GaussianComponent, MomentumGridSpec, build_momentum_state

K0, SIGMA = 20.0, 1.5


def spread(t):
    return math.sqrt(1.0 / (4 * SIGMA**2) + SIGMA**2 * t * t)


def analytic_density(x, t):
    s = spread(t)
    return np.exp(-0.5 * ((x - K0 * t) / s) ** 2) / (s * math.sqrt(2 * math.pi))


@pytest.mark.parametrize("t", [0.0, 0.01, 0.1, 0.3])
def test_free_gaussian_density(gaussian, t):
    field = evolve(gaussian, t)
    np.testing.assert_allclose(field.density, analytic_density(field.grid_x, t), atol=1e-10)
    assert field.norm() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("t", [0.0, 0.005, 0.02])
def test_gaussian_left_tail_is_erfc(gaussian, t):
    field = evolve(gaussian, t)
    expected = 0.5 * erfc(K0 * t / (math.sqrt(2) * spread(t)))
    assert left_probability(field) == pytest.approx(expected, abs=1e-10)
    assert left_probability(field) + right_probability(field) == pytest.approx(1.0, abs=1e-10)


def test_spreading_law(gaussian):
    t = 0.2
    field = evolve(gaussian, t)
    w = field.grid.weights * field.density
    mean = w @ field.grid_x
    var = w @ (field.grid_x - mean) ** 2
    assert mean == pytest.approx(K0 * t, abs=1e-9)
    assert var == pytest.approx(spread(t) ** 2, rel=1e-9)


def test_current_matches_direct_sum(gaussian):
    field = evolve(gaussian, 0.01)
    for x0 in (-0.3, 0.0, 0.17):
        assert probability_current(field, x0) == pytest.approx(current_at(gaussian, [0.01], x0)[0], rel=1e-7)


def test_current_outside_grid(gaussian):
    field = evolve(gaussian, 0.0)
    with pytest.raises(InvalidArgumentError):
        probability_current(field, 1e3)


@pytest.mark.parametrize("t", [0.001, 0.002, 0.01])
def test_flux_balance(bus, t):
    """dP_left/dt = -j(0, t)."""
    rate = left_probability_rate(bus, t)
    assert rate == pytest.approx(-current_at(bus, [t])[0], abs=1e-4)


def test_flux_and_density_backflow_agree(bus):
    series = left_probability_series(bus, [0.0, 0.002])
    flux = flux_backflow(bus, 0.0, 0.002)
    assert series.p_left[1] - series.p_left[0] == pytest.approx(flux, abs=1e-10)
    assert backflow_amount(bus, 0.0, 0.002) == pytest.approx(flux, abs=1e-10)


def test_gaussian_has_no_backflow(gaussian):
    assert backflow_amount(gaussian, 0.0, 0.05) <= 0.0


def test_positive_momentum_current_is_mostly_positive(gaussian):
    j = current_at(gaussian, np.linspace(0, 0.1, 50))
    assert np.all(j > 0)


def test_small_grid_raises_truncation(gaussian):
    with pytest.raises(TruncationError):
        evolve(gaussian, 0.3, PositionGridSpec(-1.0, 1.0))


def test_empty_series(bus):
    series = left_probability_series(bus, [])
    assert len(series) == 0


@pytest.mark.parametrize("times", [[0.1, 0.05], [-0.1, 0.2], [0.0, np.nan]])
def test_bad_time_lists(bus, times):
    with pytest.raises(InvalidArgumentError):
        left_probability_series(bus, times)


def test_bad_interval(bus):
    with pytest.raises(InvalidArgumentError):
        backflow_amount(bus, 0.002, 0.001)


def test_propagate_gradient_matches_finite_difference(gaussian):
    x = np.array([0.1, 0.2])
    h = 1e-6
    psi, dpsi = propagate(gaussian, x, [0.01], gradient=True)
    fd = (propagate(gaussian, x + h, [0.01]) - propagate(gaussian, x - h, [0.01])) / (2 * h)
    np.testing.assert_allclose(dpsi, fd, atol=1e-6)


def test_auto_grid_needs_components(coarse_solution):
    from backflow.spectral import export_optimal_state
    with pytest.raises(InvalidArgumentError):
        auto_position_grid(export_optimal_state(coarse_solution), 0.0)


def test_real_amplitude_has_no_current():
    from backflow.dynamics import SpaceTimeField
    grid = PositionGridSpec(-2, 2).build()
    amp = np.exp(-grid.nodes**2).astype(complex)
    field = SpaceTimeField(grid, amp, -2 * grid.nodes * amp, 0.0)
    assert probability_current(field, 0.3) == 0.0


def test_slowly_modulated_plane_wave_current():
    # narrow in k, so locally psi ~ exp(i k0 x) * envelope and j ~ k0 |psi|^2
    st_ = build_momentum_state([GaussianComponent(1.0, 25.0, 0.2)])
    field = evolve(st_, 0.0)
    x0 = 0.4
    dens = field.grid.interpolate(field.density, np.array([x0]))[0]
    assert probability_current(field, x0) == pytest.approx(25.0 * dens, rel=1e-2)


def test_packet_far_right_has_no_left_mass():
    st_ = build_momentum_state([GaussianComponent(1.0, 20.0, 1.5, phase_x0=8.0)])
    assert left_probability(evolve(st_, 0.0)) < 1e-6


def test_bus_current_negative_early(bus):
    j = current_at(bus, np.linspace(1e-4, 0.002, 20))
    assert j.min() < 0


def test_bus_series_rises_then_falls(bus):
    series = left_probability_series(bus, np.linspace(0, 0.004, 81))
    i = int(np.argmax(series.p_left))
    assert 0 < i < 80
    assert series.p_left[-1] < series.p_left[i]


def test_bus_long_time_limit():
    # the phase x k - k^2 t / 2 changes by up to ~1000 rad per unit k here, and the
    # fast component is only negligible beyond k ~ 75
    from backflow.states import reference_quantum_bus
    fine = reference_quantum_bus(MomentumGridSpec(80.0, 65536))
    grid = PositionGridSpec(-200.0, 0.0, panel_width=2.0).build()
    dens = np.abs(propagate(fine, grid.nodes, [10.0])[:, 0]) ** 2
    assert grid.weights @ dens < 0.01
    assert np.all(dens[:-1] <= dens[-1] + 1e-12)


def test_single_time_series(bus):
    series = left_probability_series(bus, [0.0])
    assert series.p_left[0] == left_probability(evolve(bus, 0.0, auto_position_grid(bus, 0.0)))


def test_scaling_by_root_two_doubles_the_interval(bus):
    # sqrt(s) phi(s k) runs s^2 times slower: s = sqrt(2) spreads [0, T] over [0, 2T]
    from backflow.states import scale_state
    T = 0.001
    slow = scale_state(bus, math.sqrt(2))
    assert backflow_amount(slow, 0.0, 2 * T) == pytest.approx(backflow_amount(bus, 0.0, T), abs=1e-12)
    mid = left_probability_series(slow, [T]).p_left[0]
    assert mid == pytest.approx(left_probability_series(bus, [T / 2]).p_left[0], abs=1e-10)
