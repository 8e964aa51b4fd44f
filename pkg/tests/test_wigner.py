import math

import numpy as np
import pytest

from backflow import dynamics, spectral, wigner
from backflow.errors import InvalidArgumentError, ResolutionError
from backflow.states import GaussianComponent, build_momentum_state


@pytest.fixture(scope="module")
def gaussian_wigner(gaussian):
    return wigner.wigner_transform(gaussian)


def test_gaussian_closed_form(gaussian, gaussian_wigner):
    c = gaussian.components[0]
    s, k0 = c.width_k, c.center_k
    X, K = np.meshgrid(gaussian_wigner.grid_x, gaussian_wigner.grid_v, indexing="ij")
    exact = np.exp(-((K - k0) ** 2) / (2 * s * s) - 2 * s * s * X**2) / math.pi
    np.testing.assert_allclose(gaussian_wigner.values, exact, atol=1e-6)


def test_displaced_gaussian_closed_form():
    st = build_momentum_state([GaussianComponent(1.0, 15.0, 2.0, phase_x0=0.7)])
    w = wigner.wigner_transform(st)
    X, K = np.meshgrid(w.grid_x, w.grid_v, indexing="ij")
    exact = np.exp(-((K - 15.0) ** 2) / 8.0 - 8.0 * (X - 0.7) ** 2) / math.pi
    np.testing.assert_allclose(w.values, exact, atol=1e-6)


def test_gaussian_is_nonnegative(gaussian_wigner):
    assert not gaussian_wigner.negative_mask().any()
    assert wigner.wigner_wedge(gaussian_wigner, 0.002) >= -1e-6


def test_bus_has_negative_region(bus_wigner):
    assert bus_wigner.values.min() < 0
    assert bus_wigner.negative_mask().any()


def test_bus_total_and_quadrants(bus_wigner):
    assert bus_wigner.total() == pytest.approx(1.0, abs=1e-6)
    left = wigner.wigner_quadrant(bus_wigner, "left")
    right = wigner.wigner_quadrant(bus_wigner, "right")
    assert left + right == pytest.approx(1.0, abs=1e-6)


def test_marginals(bus, bus_wigner):
    rho = np.abs(dynamics.propagate(bus, bus_wigner.grid_x, [0.0])[:, 0]) ** 2
    np.testing.assert_allclose(bus_wigner.marginal_x(), rho, atol=1e-6)
    np.testing.assert_allclose(bus_wigner.marginal_v(), np.abs(bus(bus_wigner.grid_v)) ** 2, atol=1e-5)
    assert bus_wigner.imag_residue < 1e-10


def test_global_and_per_k_paths_agree(gaussian):
    spec = wigner.auto_wigner_spec(gaussian)
    a = wigner.wigner_transform(gaussian, spec, method="global")
    b = wigner.wigner_transform(gaussian, spec, method="per-k")
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_quadrant_series_matches_density(bus, bus_wigner):
    times = [0.0, 0.001, 0.002, 0.004]
    quad = wigner.wigner_left_series(bus_wigner, times)
    direct = dynamics.left_probability_series(bus, times)
    np.testing.assert_allclose(quad.p_left, direct.p_left, atol=1e-6)


def test_wedge_equals_left_drop(bus, bus_wigner):
    T = 0.002
    change = dynamics.left_probability_series(bus, [0.0, T])
    assert wigner.wigner_wedge(bus_wigner, T) == pytest.approx(change.p_left[0] - change.p_left[1], abs=1e-6)


def test_shear_identity_trivial_at_zero(gaussian):
    assert wigner.wigner_shear_check(gaussian, 0.0) == 0.0


def test_shear_identity_gaussian(gaussian):
    assert wigner.wigner_shear_check(gaussian, 0.1) <= 1e-6


def test_shear_identity_bus(bus):
    assert wigner.wigner_shear_check(bus, 0.05) <= 1e-4


def test_optimal_state_wedge():
    # hard cutoffs at both ends of the eigenfunction, so clipped q-rules; only
    # the wedge strip -k T <= x <= 0 is needed
    T = 1.0
    sol = spectral.solve_backflow(60, 5.0)
    state = spectral.export_optimal_state(sol, T)
    k_hi = state.k_max
    spec = wigner.WignerGridSpec(-k_hi * T - 0.5, 0.0, 0.0, k_hi, x_panel=0.2, k_panel=0.5, q_panel=0.1)
    w = wigner.wigner_transform(state, spec, method="per-k", check=False)
    assert wigner.wigner_wedge(w, T) == pytest.approx(-sol.eigenvalue, abs=1e-4)


def test_coarse_grid_is_rejected(bus):
    spec = wigner.auto_wigner_spec(bus)
    coarse = wigner.WignerGridSpec(spec.x_min, spec.x_max, spec.k_min, spec.k_max,
                                   x_panel=spec.x_panel, k_panel=spec.k_panel, q_panel=2.0, order=4)
    with pytest.raises(ResolutionError):
        wigner.wigner_transform(bus, coarse)


@pytest.mark.parametrize("kw", [dict(x_min=1.0, x_max=0.0), dict(k_min=-1.0), dict(q_panel=0.0),
                                dict(x_panel=math.nan)])
def test_spec_validation(kw):
    base = dict(x_min=-1.0, x_max=1.0, k_min=0.0, k_max=10.0)
    base.update(kw)
    with pytest.raises(InvalidArgumentError):
        wigner.WignerGridSpec(**base)


def test_unknown_method(gaussian):
    with pytest.raises(InvalidArgumentError):
        wigner.wigner_transform(gaussian, method="fft")
