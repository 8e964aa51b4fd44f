"""Free Schrodinger propagation, position densities, currents and backflow.

In dimensionless units the evolved wave function is

    psi(x, t) = (2 pi)^(-1/2) * integral_0^inf phi(k) exp(i (k x - k^2 t / 2)) dk,

evaluated by direct quadrature on the state's momentum nodes.  The probability
current is ``Im(conj(psi) * dpsi/dx)`` and obeys ``dP_left/dt = -j(0, t)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalError, TruncationError
from .quadrature import PanelGrid
from .states import MomentumState

log = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
NORM_TOL = 1e-8
EDGE_TAIL_TOL = 1e-6
FLUX_TOL = 1e-4
_CHUNK = 256


@dataclass(frozen=True)
class PositionGridSpec:
    x_min: float
    x_max: float
    panel_width: float = 0.2
    order: int = 16

    def build(self) -> PanelGrid:
        return PanelGrid.covering(self.x_min, self.x_max, self.panel_width, self.order, breakpoints=(0.0,))


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    grid: PanelGrid
    amplitude: np.ndarray
    gradient: np.ndarray
    time: float

    @property
    def grid_x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def norm(self) -> float:
        return float(np.sum(self.grid.weights * self.density))


@dataclass(frozen=True, eq=False)
class ProbabilitySeries:
    times: np.ndarray
    p_left: np.ndarray
    p_right: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.p_left, dtype=float)
        if p.size and (p.min() < -1e-9 or p.max() > 1 + 1e-9):
            raise NumericalError("left probability left [0, 1]")

    def __len__(self):
        return len(self.times)


def _active_modes(state: MomentumState, rel: float = 1e-17):
    """Nodes whose contribution w*|phi| is not negligible, with their weighted amplitudes."""
    wphi = state.quadrature_weights * state.amplitude
    mag = np.abs(wphi)
    keep = mag > rel * mag.max()
    return state.grid_k[keep], wphi[keep]


def _check_times(times):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or not np.all(np.isfinite(times)):
        raise InvalidArgumentError("times must be a finite 1-D array")
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise InvalidArgumentError("times must be nonnegative and strictly increasing")
    return times


def propagate(state: MomentumState, x, times, gradient: bool = False):
    """psi (and optionally dpsi/dx) at positions ``x`` for each time; shape (len(x), len(times))."""
    x = np.asarray(x, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    k, wphi = _active_modes(state)
    phases = wphi[:, None] * np.exp(-0.5j * np.outer(k * k, times)) / SQRT_2PI
    psi = np.empty((x.size, times.size), dtype=complex)
    dpsi = np.empty_like(psi) if gradient else None
    dphases = (1j * k)[:, None] * phases if gradient else None
    for start in range(0, x.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        waves = np.exp(1j * np.outer(x[sl], k))
        psi[sl] = waves @ phases
        if gradient:
            dpsi[sl] = waves @ dphases
    return (psi, dpsi) if gradient else psi


def auto_position_grid(state: MomentumState, t_min: float, t_max: float | None = None,
                       n_sigma: float = 12.0) -> PositionGridSpec:
    """Window covering every Gaussian component between ``t_min`` and ``t_max``."""
    if not state.components:
        raise InvalidArgumentError("state has no analytic profile; pass an explicit position grid")
    t_max = t_min if t_max is None else t_max
    lo, hi = np.inf, -np.inf
    for c in state.components:
        for t in (t_min, t_max):
            centre = c.phase_x0 + c.center_k * t
            width = math.hypot(c.width_x, c.width_k * t)
            lo, hi = min(lo, centre - n_sigma * width), max(hi, centre + n_sigma * width)
    k_hi = min(state.k_max, max(c.center_k + 10.0 * c.width_k for c in state.components))
    return PositionGridSpec(lo, hi, panel_width=min(0.5, 12.0 / max(k_hi, 1.0)))


def _resolve_grid(state, grid, t_min, t_max=None) -> PanelGrid:
    if grid is None:
        grid = auto_position_grid(state, t_min, t_max)
    if isinstance(grid, PositionGridSpec):
        grid = grid.build()
    return grid


def _edge_tail(grid: PanelGrid, density: np.ndarray) -> np.ndarray:
    n = grid.order
    w = grid.weights[:, None] * density.reshape(grid.size, -1)
    return np.maximum(w[:n].sum(axis=0), w[-n:].sum(axis=0))


def _check_window(grid: PanelGrid, density: np.ndarray, norm: float) -> None:
    """Raise if the window misses mass: heavy boundary panels or a short total."""
    tail = float(_edge_tail(grid, density).max())
    missing = float(np.max(norm - grid.weights @ density.reshape(grid.size, -1)))
    lost = max(tail, missing)
    if lost > EDGE_TAIL_TOL:
        raise TruncationError(f"position grid [{grid.lower:.4g}, {grid.upper:.4g}] too small: "
                              f"boundary mass {tail:.3g}, missing mass {missing:.3g}", lost_mass=lost)


def evolve(state: MomentumState, t: float, grid: PositionGridSpec | PanelGrid | None = None) -> SpaceTimeField:
    if not (math.isfinite(t) and t >= 0):
        raise InvalidArgumentError("time must be finite and nonnegative")
    grid = _resolve_grid(state, grid, t)
    psi, dpsi = propagate(state, grid.nodes, [t], gradient=True)
    psi, dpsi = psi[:, 0], dpsi[:, 0]
    _check_window(grid, np.abs(psi) ** 2, state.norm())
    return SpaceTimeField(grid, psi, dpsi, float(t))


def _split_mass(grid: PanelGrid, density: np.ndarray, x0: float):
    """(mass below x0, mass above x0) for each column of ``density``."""
    density = density.reshape(grid.size, -1)
    if x0 <= grid.lower:
        left = np.zeros(density.shape[1])
    elif x0 >= grid.upper or grid.has_edge(x0):
        below = grid.nodes < x0
        left = grid.weights[below] @ density[below]
    else:
        left = grid.integrate_columns(density, grid.lower, x0)
    total = grid.weights @ density
    if x0 >= grid.upper:
        return total, np.zeros_like(total)
    if grid.has_edge(x0) or x0 <= grid.lower:
        above = grid.nodes >= x0
        return left, grid.weights[above] @ density[above]
    return left, grid.integrate_columns(density, x0, grid.upper)


def left_probability(field: SpaceTimeField, x0: float = 0.0) -> float:
    return float(_split_mass(field.grid, field.density, x0)[0][0])


def right_probability(field: SpaceTimeField, x0: float = 0.0) -> float:
    return float(_split_mass(field.grid, field.density, x0)[1][0])


def probability_current(field: SpaceTimeField, x0: float) -> float:
    if not (field.grid.lower <= x0 <= field.grid.upper):
        raise InvalidArgumentError(f"x0={x0} lies outside the position grid")
    psi = field.grid.interpolate(field.amplitude, np.array([x0]))[0]
    dpsi = field.grid.interpolate(field.gradient, np.array([x0]))[0]
    return float(np.imag(np.conj(psi) * dpsi))


def current_at(state: MomentumState, times, x0: float = 0.0) -> np.ndarray:
    """Current through ``x0`` at each time, straight from the momentum integral."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    k, wphi = _active_modes(state)
    out = np.empty(times.size)
    base = wphi * np.exp(1j * k * x0) / SQRT_2PI
    for start in range(0, times.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        e = np.exp(-0.5j * np.outer(times[sl], k * k))
        psi = e @ base
        dpsi = e @ (1j * k * base)
        out[sl] = np.imag(np.conj(psi) * dpsi)
    return out


def left_probability_series(state: MomentumState, times, grid: PositionGridSpec | PanelGrid | None = None,
                            x0: float = 0.0) -> ProbabilitySeries:
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        return ProbabilitySeries(times, np.empty(0), np.empty(0))
    times = _check_times(times)
    grid = _resolve_grid(state, grid, float(times[0]), float(times[-1]))
    left, right = np.empty(times.size), np.empty(times.size)
    for start in range(0, times.size, 64):
        sl = slice(start, start + 64)
        dens = np.abs(propagate(state, grid.nodes, times[sl])) ** 2
        _check_window(grid, dens, state.norm())
        left[sl], right[sl] = _split_mass(grid, dens, x0)
    return ProbabilitySeries(times, left, right)


def time_rule(t1: float, t2: float, omega: float, order: int = 16) -> PanelGrid:
    """Gauss-Legendre panels on [t1, t2] resolving oscillations up to angular frequency ``omega``."""
    n = max(1, int(math.ceil((t2 - t1) * omega / 6.0)))
    return PanelGrid.uniform(t1, t2, n, order)


def flux_backflow(state: MomentumState, t1: float, t2: float, x0: float = 0.0) -> float:
    """-integral_{t1}^{t2} j(x0, t) dt: probability gained by the region left of ``x0``."""
    k_lo, k_hi = state.support()
    omega = 0.5 * (k_hi * k_hi - k_lo * k_lo) + abs(x0) * (k_hi - k_lo) + 1.0
    rule = time_rule(t1, t2, omega)
    return float(-(rule.weights @ current_at(state, rule.nodes, x0)))


def left_probability_rate(state: MomentumState, t: float, h: float = 1e-5, grid=None) -> float:
    """dP_left/dt by Richardson-extrapolated centred differences (error O(h^4)).

    Compare with -current_at(state, t).
    """
    if t - h < 0:
        raise InvalidArgumentError("finite-difference stencil would reach negative time")
    p = left_probability_series(state, [t - h, t - 0.5 * h, t + 0.5 * h, t + h], grid).p_left
    wide = (p[3] - p[0]) / (2.0 * h)
    narrow = (p[2] - p[1]) / h
    return float((4.0 * narrow - wide) / 3.0)


def backflow_amount(state: MomentumState, t1: float, t2: float,
                    grid: PositionGridSpec | PanelGrid | None = None, tol: float = FLUX_TOL) -> float:
    """P_left(t2) - P_left(t1), cross-checked against the time-integrated current.

    States without an analytic profile (whose position-space tails are too long
    for a finite window) are measured with the current integral alone.
    """
    if not (math.isfinite(t1) and math.isfinite(t2)) or t1 < 0 or t2 <= t1:
        raise InvalidArgumentError("backflow interval needs 0 <= t1 < t2")
    flux = flux_backflow(state, t1, t2)
    if grid is None and not state.components:
        log.debug("no analytic profile; backflow from current integral only")
        return flux
    series = left_probability_series(state, [t1, t2], grid)
    gained = float(series.p_left[1] - series.p_left[0])
    if abs(gained - flux) > tol:
        raise NumericalError(f"density ({gained:.3e}) and flux ({flux:.3e}) backflow disagree")
    return gained
