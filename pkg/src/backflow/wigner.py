"""Wigner quasi-probability of positive-momentum states.

    W_t(x, k) = (1/pi) * integral phi_t*(k + q) phi_t(k - q) exp(-2 i q x) dq,

with phi_t(k) = phi(k) exp(-i k^2 t / 2).  Because phi vanishes for k < 0 the
q-range at a given k is |q| <= min(k - k_lo, k_hi - k), so W is zero outside
the momentum support.  The pair (q, -q) contributes complex conjugates, so
only q > 0 is summed and the real part is taken.

Free evolution shears W exactly, W_t(x, k) = W_0(x - k t, k), which is what
lets quadrant and wedge masses be read off the t = 0 surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import PhaseSpaceGrid, classical_left_series, quadrant_probability, shear_evolve, wedge_probability
from .dynamics import ProbabilitySeries, auto_position_grid, propagate
from .errors import InvalidArgumentError, ResolutionError
from .quadrature import PanelGrid
from .states import MomentumState

NEGATIVE_THRESHOLD = -1e-9
MARGINAL_TOL = 1e-4
SMOOTH_EDGE = 1e-4  # relative edge amplitude below which a shared q-grid stays accurate to ~1e-7


@dataclass(frozen=True, eq=False)
class WignerGrid(PhaseSpaceGrid):
    imag_residue: float = 0.0
    marginal_error: float = 0.0

    def negative_mask(self, threshold: float = NEGATIVE_THRESHOLD) -> np.ndarray:
        return self.values < threshold


@dataclass(frozen=True)
class WignerGridSpec:
    x_min: float
    x_max: float
    k_min: float
    k_max: float
    x_panel: float = 0.1
    k_panel: float = 1.0
    q_panel: float = 0.5
    order: int = 16

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.k_min, self.k_max, self.x_panel, self.k_panel, self.q_panel)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidArgumentError("Wigner grid parameters must be finite")
        if self.x_max <= self.x_min or self.k_max <= self.k_min or self.k_min < 0:
            raise InvalidArgumentError("Wigner grid needs x_min < x_max and 0 <= k_min < k_max")
        if min(self.x_panel, self.k_panel, self.q_panel) <= 0:
            raise InvalidArgumentError("panel widths must be positive")

    def x_grid(self) -> PanelGrid:
        return PanelGrid.covering(self.x_min, self.x_max, self.x_panel, self.order, breakpoints=(0.0,))

    def k_grid(self) -> PanelGrid:
        return PanelGrid.covering(self.k_min, self.k_max, self.k_panel, self.order, breakpoints=())


def auto_wigner_spec(state: MomentumState, t: float = 0.0, extend_right: float = 0.0,
                     n_sigma: float = 12.0) -> WignerGridSpec:
    """Grid covering a Gaussian-mixture state at time ``t``.

    ``extend_right`` widens the window to the right, e.g. by k_max * t_shear
    so that the surface can later be sheared without losing mass.
    """
    pos = auto_position_grid(state, t, n_sigma=n_sigma)
    k_lo, k_hi = state.support()
    reach = 0.5 * (k_hi - k_lo)
    x_span = max(abs(pos.x_min), abs(pos.x_max + extend_right))
    comp_width = min(c.width_k for c in state.components)
    return WignerGridSpec(
        pos.x_min, pos.x_max + extend_right, k_lo, k_hi,
        x_panel=min(0.5, 6.0 / (2.0 * reach)),
        # oscillation in k from the shear, exp(2 i k q t)
        k_panel=min(1.0, comp_width, 6.0 / (1.0 + 2.0 * reach * t)),
        q_panel=min(comp_width, 6.0 / (2.0 * (x_span + k_hi * t))),
    )


def _positive_half_rule(upper: float, panel: float, order: int):
    n = max(1, int(math.ceil(upper / panel)))
    g = PanelGrid.uniform(0.0, upper, n, order)
    return g.nodes, g.weights


def _evolved(state: MomentumState, k: np.ndarray, t: float) -> np.ndarray:
    amp = state(k)
    return amp * np.exp(-0.5j * t * k * k) if t else amp


def _transform_global(state, xg, kg, t, spec, k_lo, k_hi):
    """One q-grid for every k; fine when the amplitude is smooth at the cutoffs."""
    x, k = xg.nodes, kg.nodes
    q, wq = _positive_half_rule(0.5 * (k_hi - k_lo), spec.q_panel, spec.order)
    plus = _evolved(state, k[None, :] + q[:, None], t)
    minus = _evolved(state, k[None, :] - q[:, None], t)
    inside = (k[None, :] - q[:, None] >= k_lo) & (k[None, :] + q[:, None] <= k_hi)
    c = np.where(inside, np.conj(plus) * minus, 0.0) * wq[:, None]
    arg = 2.0 * np.outer(x, q)
    # contiguous copies keep the products on BLAS
    re, im = np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag)
    values = (2.0 / math.pi) * (np.cos(arg) @ re + np.sin(arg) @ im)
    return values, _residue_bound(state, k, q, wq, t, c)


def _transform_per_k(state, xg, kg, t, spec, k_lo, k_hi):
    """Separate q-rule for each k, ending exactly where phi(k +- q) is cut off."""
    x, k = xg.nodes, kg.nodes
    values = np.zeros((x.size, k.size))
    residue = 0.0
    for j, kj in enumerate(k):
        reach = min(kj - k_lo, k_hi - kj)
        if reach <= 0:
            continue
        q, wq = _positive_half_rule(reach, spec.q_panel, spec.order)
        c = np.conj(_evolved(state, kj + q, t)) * _evolved(state, kj - q, t) * wq
        arg = 2.0 * np.outer(x, q)
        values[:, j] = (2.0 / math.pi) * (np.cos(arg) @ np.ascontiguousarray(c.real)
                                          + np.sin(arg) @ np.ascontiguousarray(c.imag))
        residue = max(residue, _residue_bound(state, np.array([kj]), q, wq, t, c[:, None]))
    return values, residue


def _residue_bound(state, k, q, wq, t, c):
    """Bound on the imaginary part dropped by summing q > 0 only.

    The full sum is real exactly when c(-q) = conj(c(q)); the mirror half is
    evaluated independently and its mismatch bounds the residue pointwise in x.
    """
    mirror = np.conj(_evolved(state, k[None, :] - q[:, None], t)) * _evolved(state, k[None, :] + q[:, None], t)
    mirror = np.where(c != 0, mirror * wq[:, None], 0.0)
    return float(np.max(np.abs(mirror - np.conj(c)).sum(axis=0)) / math.pi)


def wigner_transform(state: MomentumState, spec: WignerGridSpec | None = None, t: float = 0.0,
                     method: str = "auto", check: bool = True) -> WignerGrid:
    """Wigner surface of ``state`` evolved to time ``t``.

    ``method`` is "global" (shared q-grid), "per-k" (q-rule clipped at the
    cutoffs for each k) or "auto", which picks per-k when the amplitude is not
    negligible at a grid end.  With ``check`` the x-marginal is compared with
    |psi|^2 and a mismatch above MARGINAL_TOL raises ResolutionError.
    """
    if not (math.isfinite(t) and t >= 0):
        raise InvalidArgumentError("time must be finite and nonnegative")
    if spec is None:
        spec = auto_wigner_spec(state, t)
    xg, kg = spec.x_grid(), spec.k_grid()
    k_lo, k_hi = state.support()
    if method == "auto":
        method = "global" if state.edge_amplitude() < SMOOTH_EDGE else "per-k"
    if method == "global":
        values, residue = _transform_global(state, xg, kg, t, spec, k_lo, k_hi)
    elif method == "per-k":
        values, residue = _transform_per_k(state, xg, kg, t, spec, k_lo, k_hi)
    else:
        raise InvalidArgumentError(f"unknown Wigner method {method!r}")
    error = 0.0
    if check:
        density = np.abs(propagate(state, xg.nodes, [t])[:, 0]) ** 2
        error = float(np.max(np.abs(values @ kg.weights - density)))
        if error > MARGINAL_TOL:
            raise ResolutionError(f"Wigner x-marginal misses |psi|^2 by {error:.3g}; refine the grid")
    return WignerGrid(xg, kg, values, time=float(t), signed=True, imag_residue=residue, marginal_error=error)


def wigner_shear_check(state: MomentumState, t: float, spec: WignerGridSpec | None = None,
                       interpolation: str = "panel") -> float:
    """Max |W_t - shear(W_0, t)| on a common grid wide enough for both."""
    if not (math.isfinite(t) and t >= 0):
        raise InvalidArgumentError("time must be finite and nonnegative")
    if spec is None:
        base = auto_wigner_spec(state, 0.0, extend_right=state.support()[1] * t)
        later = auto_wigner_spec(state, t)
        spec = WignerGridSpec(min(base.x_min, later.x_min), max(base.x_max, later.x_max), base.k_min, base.k_max,
                              x_panel=min(base.x_panel, later.x_panel), k_panel=min(base.k_panel, later.k_panel),
                              q_panel=min(base.q_panel, later.q_panel))
    w0 = wigner_transform(state, spec, 0.0, check=False)
    if t == 0:
        return 0.0
    # the signed surface has slowly decaying x-tails; their |W| mass is not
    # a probability, so only the marginal tolerance applies to what leaves
    sheared = shear_evolve(w0, t, interpolation=interpolation, mass_tol=MARGINAL_TOL)
    direct = wigner_transform(state, spec, t, check=False)
    return float(np.max(np.abs(direct.values - sheared.values)))


def wigner_quadrant(grid: PhaseSpaceGrid, side: str) -> float:
    return quadrant_probability(grid, side)


def wigner_left_series(grid: PhaseSpaceGrid, times) -> ProbabilitySeries:
    """Left quadrant mass of the sheared surface W_0(x - k t, k) for each time."""
    return classical_left_series(grid, times)


def wigner_wedge(grid: PhaseSpaceGrid, T: float) -> float:
    """Signed mass in {k > 0, -k T <= x < 0}; equals P_left(0) - P_left(T)."""
    return wedge_probability(grid, T)
