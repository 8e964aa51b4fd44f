"""Liouville transport of a joint (position, velocity) density.

A free classical ensemble evolves by shearing, f_t(x, v) = f_0(x - v t, v).
The same machinery is reused for Wigner functions, whose values may be
negative; ``PhaseSpaceGrid.signed`` switches off the positivity clamp.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .dynamics import ProbabilitySeries, _check_times
from .errors import InvalidArgumentError, TruncationError
from .quadrature import PanelGrid
from .states import ClassicalState

MASS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    x_grid: PanelGrid
    v_grid: PanelGrid
    values: np.ndarray  # shape (len(x), len(v))
    time: float = 0.0
    signed: bool = False
    clamped_mass: float = 0.0
    lost_mass: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.x_grid.size, self.v_grid.size):
            raise InvalidArgumentError("values must have shape (len(x), len(v))")
        object.__setattr__(self, "values", values)

    @property
    def grid_x(self) -> np.ndarray:
        return self.x_grid.nodes

    @property
    def grid_v(self) -> np.ndarray:
        return self.v_grid.nodes

    @property
    def cell_weights(self) -> np.ndarray:
        return np.outer(self.x_grid.weights, self.v_grid.weights)

    def total(self) -> float:
        return float(self.x_grid.weights @ self.values @ self.v_grid.weights)

    def marginal_x(self) -> np.ndarray:
        return self.values @ self.v_grid.weights

    def marginal_v(self) -> np.ndarray:
        return self.x_grid.weights @ self.values


def classical_joint(state: ClassicalState) -> PhaseSpaceGrid:
    """Product density rho(x) g(v) on the state's own grids."""
    values = np.outer(state.position_density, state.velocity_density)
    return PhaseSpaceGrid(state.x_grid, state.v_grid, values)


def _cubic_rows(x: np.ndarray, values: np.ndarray, xq: np.ndarray) -> np.ndarray:
    """Natural cubic spline of each column of ``values``, column j evaluated at ``xq[:, j]``."""
    spline = CubicSpline(x, values, axis=0, bc_type="natural")
    c = spline.c  # (4, len(x)-1, m)
    idx = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2)
    cols = np.arange(values.shape[1])[None, :]
    dx = xq - x[idx]
    out = ((c[0][idx, cols] * dx + c[1][idx, cols]) * dx + c[2][idx, cols]) * dx + c[3][idx, cols]
    inside = (xq >= x[0]) & (xq <= x[-1])
    return np.where(inside, out, 0.0)


def shear_evolve(grid: PhaseSpaceGrid, t: float, interpolation: str = "cubic",
                 mass_tol: float = MASS_TOL) -> PhaseSpaceGrid:
    """Advance the density by time ``t``: each velocity row slides right by v t.

    Values that would come from beyond the left edge are zero.  Mass pushed past
    the right edge is measured and must stay below ``mass_tol``.
    """
    if not (np.isfinite(t) and t >= 0):
        raise InvalidArgumentError("shear time must be finite and nonnegative")
    if t == 0:
        return grid
    xg = grid.x_grid
    x, v = xg.nodes, grid.v_grid.nodes
    source = x[:, None] - v[None, :] * t
    if interpolation == "cubic":
        values = _cubic_rows(x, grid.values, source)
    elif interpolation == "panel":
        values = xg.interpolate(grid.values, source)
    else:
        raise InvalidArgumentError(f"unknown interpolation {interpolation!r}")
    # mass carried across the right boundary, per row
    lost_rows = xg.integrate_columns(grid.values, np.maximum(xg.upper - v * t, xg.lower), xg.upper)
    lost = float(np.abs(lost_rows) @ grid.v_grid.weights)
    if lost > mass_tol:
        raise TruncationError(f"shear by t={t} carries mass {lost:.3g} beyond x={xg.upper}", lost_mass=lost)
    clamped = 0.0
    if not grid.signed:
        neg = np.minimum(values, 0.0)
        clamped = float(-(xg.weights @ neg @ grid.v_grid.weights))
        values = values - neg
    return replace(grid, values=values, time=grid.time + t, clamped_mass=clamped, lost_mass=lost)


def _split(grid: PhaseSpaceGrid, x0: float = 0.0):
    xg = grid.x_grid
    if xg.has_edge(x0) or x0 <= xg.lower or x0 >= xg.upper:
        below = xg.nodes < x0
        left = xg.weights[below] @ grid.values[below] @ grid.v_grid.weights
        right = xg.weights[~below] @ grid.values[~below] @ grid.v_grid.weights
    else:
        left = xg.integrate_columns(grid.values, xg.lower, x0) @ grid.v_grid.weights
        right = xg.integrate_columns(grid.values, x0, xg.upper) @ grid.v_grid.weights
    return float(left), float(right)


def quadrant_probability(grid: PhaseSpaceGrid, side: str) -> float:
    """Mass on x < 0 ('left') or x > 0 ('right') over the grid's velocity range."""
    left, right = _split(grid)
    if side == "left":
        return left
    if side == "right":
        return right
    raise InvalidArgumentError("side must be 'left' or 'right'")


def wedge_probability(grid: PhaseSpaceGrid, T: float) -> float:
    """Mass in {v > 0, -v T <= x < 0}: what crosses x = 0 during the next T."""
    if not (np.isfinite(T) and T > 0):
        raise InvalidArgumentError("wedge duration must be positive")
    v = grid.v_grid.nodes
    pos = v > 0
    rows = np.zeros(v.size)
    rows[pos] = grid.x_grid.integrate_columns(grid.values[:, pos], -v[pos] * T, 0.0)
    return float(rows @ grid.v_grid.weights)


def classical_left_series(state: ClassicalState | PhaseSpaceGrid, times) -> ProbabilitySeries:
    """P_left(t) of the sheared density, integrated exactly along each row.

    Since f_t(x, v) = f_0(x - v t, v), the mass left of the origin at time t is
    the integral of f_0 over x < -v t; no resampling of the grid is needed.
    """
    grid = classical_joint(state) if isinstance(state, ClassicalState) else state
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        return ProbabilitySeries(times, np.empty(0), np.empty(0))
    times = _check_times(times)
    xg, vg = grid.x_grid, grid.v_grid
    v = vg.nodes
    total = grid.total()
    left = np.empty(times.size)
    integrate = xg.column_integrator(grid.values)
    for i, t in enumerate(times):
        rows = integrate(xg.lower, -v * t)
        left[i] = rows @ vg.weights
    return ProbabilitySeries(times, left, total - left)
