"""Positive-momentum quantum states and matched classical densities.

A quantum state is stored in momentum space, sampled on a composite
Gauss-Legendre grid over [0, k_max].  Gaussian-mixture states keep their
analytic components so they can be evaluated off the grid exactly; other
states (for example an imported eigenvector) fall back to panel interpolation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateStateError, InvalidArgumentError
from .quadrature import PanelGrid

NORM_TOL = 1e-10


@dataclass(frozen=True)
class GaussianComponent:
    """``weight * exp(-(k - center_k)^2 / (4 width_k^2) - i k phase_x0)``.

    ``width_k`` is the standard deviation of |amplitude|^2, so the matching
    position packet has standard deviation ``1 / (2 width_k)`` and is centred
    at ``phase_x0``.
    """

    weight: complex
    center_k: float
    width_k: float
    phase_x0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.width_k) and self.width_k > 0):
            raise InvalidArgumentError("width_k must be positive")
        if not (math.isfinite(self.center_k) and math.isfinite(self.phase_x0)):
            raise InvalidArgumentError("component parameters must be finite")
        if not np.isfinite(complex(self.weight)):
            raise InvalidArgumentError("component weight must be finite")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return self.weight * np.exp(-((k - self.center_k) ** 2) / (4.0 * self.width_k**2) - 1j * k * self.phase_x0)

    def scaled(self, s: float) -> "GaussianComponent":
        # sqrt(s) * g(s k) is again a Gaussian in k
        return GaussianComponent(self.weight * math.sqrt(s), self.center_k / s, self.width_k / s, self.phase_x0 * s)

    @property
    def width_x(self) -> float:
        return 0.5 / self.width_k


@dataclass(frozen=True)
class MomentumGridSpec:
    k_max: float = 60.0
    n_points: int = 4096
    order: int = 16

    def build(self) -> PanelGrid:
        if not (self.k_max > 0 and self.n_points >= 2):
            raise InvalidArgumentError("momentum grid needs k_max > 0 and at least 2 points")
        order = min(self.order, self.n_points)
        n_panels = max(1, round(self.n_points / order))
        return PanelGrid.uniform(0.0, self.k_max, n_panels, order)


@dataclass(frozen=True, eq=False)
class MomentumState:
    grid: PanelGrid
    amplitude: np.ndarray
    components: tuple = ()
    label: str = ""

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=complex)
        if amp.shape != self.grid.nodes.shape:
            raise InvalidArgumentError("amplitude and grid sizes differ")
        if self.grid.lower < 0:
            raise InvalidArgumentError("momentum grid must lie in k >= 0")
        object.__setattr__(self, "amplitude", amp)
        norm = self.norm()
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state is not normalized (norm {norm!r})")

    @property
    def grid_k(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def quadrature_weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def k_max(self) -> float:
        return self.grid.upper

    def norm(self) -> float:
        return float(np.sum(self.grid.weights * np.abs(self.amplitude) ** 2))

    def __call__(self, k):
        """Amplitude at arbitrary wavenumbers; zero outside [0, k_max]."""
        k = np.asarray(k, dtype=float)
        inside = (k >= 0.0) & (k <= self.k_max)
        if self.components:
            value = sum(c(k) for c in self.components)
        else:
            value = self.grid.interpolate(self.amplitude, k)
        return np.where(inside, value, 0.0)

    def support(self, rel: float = 1e-14) -> tuple[float, float]:
        """Smallest [k_lo, k_hi] outside of which |amplitude| < rel * max."""
        mag = np.abs(self.amplitude)
        keep = np.nonzero(mag >= rel * mag.max())[0]
        k = self.grid_k
        # widen to the enclosing panel edges so the bracket is conservative
        lo = self.grid.edges[np.searchsorted(self.grid.edges, k[keep[0]], side="right") - 1]
        hi = self.grid.edges[min(np.searchsorted(self.grid.edges, k[keep[-1]], side="left"), self.grid.n_panels)]
        return float(lo), float(hi)

    def edge_amplitude(self) -> float:
        """Largest |amplitude| at the first or last node, relative to the peak."""
        mag = np.abs(self.amplitude)
        return float(max(mag[0], mag[-1]) / mag.max())


def _normalize(grid: PanelGrid, amplitude: np.ndarray):
    norm = float(np.sum(grid.weights * np.abs(amplitude) ** 2))
    if not np.isfinite(norm) or norm <= 1e-300:
        raise DegenerateStateError("state has zero norm on the positive-momentum grid")
    return 1.0 / math.sqrt(norm)


def build_momentum_state(components: Sequence[GaussianComponent], grid: MomentumGridSpec | PanelGrid | None = None,
                         label: str = "gaussian-mixture") -> MomentumState:
    """Superpose Gaussian components, truncate to [0, k_max] and normalize."""
    components = tuple(components)
    if not components:
        raise InvalidArgumentError("need at least one component")
    if grid is None:
        grid = MomentumGridSpec()
    if isinstance(grid, MomentumGridSpec):
        grid = grid.build()
    amp = sum(c(grid.nodes) for c in components)
    factor = _normalize(grid, amp)
    scaled = tuple(replace(c, weight=c.weight * factor) for c in components)
    amp = sum(c(grid.nodes) for c in scaled)
    return MomentumState(grid, amp, scaled, label)


def state_from_samples(grid: PanelGrid, amplitude, label: str = "samples") -> MomentumState:
    amplitude = np.asarray(amplitude, dtype=complex)
    return MomentumState(grid, amplitude * _normalize(grid, amplitude), (), label)


# Canonical quantum bus: a slow, narrow packet plus a fast, broad one, both
# launched from the origin.  Found by scripts/tune_reference_bus.py (random
# sampling then Nelder-Mead) maximizing the peak of P_left(t) - P_left(0) over
# t <= 0.004 with P_left(0) = 1/2 and both Gaussians at least 6.5 widths above
# k = 0, then rescaled (s = sqrt(0.002 / 0.003744)) so the peak falls at t = 0.002.
REFERENCE_BUS_COMPONENTS = (
    GaussianComponent(complex(-0.6628783259, 0.0), 7.4589, 1.1475, -0.0083),
    GaussianComponent(complex(0.0577741803, -0.0823792525), 37.3695, 4.1098, -0.0455),
)
# wide enough that the fast component is ~10 widths inside the cutoff
REFERENCE_BUS_GRID = MomentumGridSpec(80.0, 4096)


def reference_quantum_bus(grid: MomentumGridSpec | PanelGrid | None = None) -> MomentumState:
    return build_momentum_state(REFERENCE_BUS_COMPONENTS, REFERENCE_BUS_GRID if grid is None else grid,
                                label="reference-quantum-bus")


def scale_state(state: MomentumState, s: float) -> MomentumState:
    """Return the state with amplitude ``sqrt(s) * phi(s k)``.

    Positions scale by ``s`` and times by ``s**2``: backflow over [0, T] of the
    original equals backflow over [0, s**2 T] of the result.
    """
    if not (isinstance(s, (int, float)) and math.isfinite(s) and s > 0):
        raise InvalidArgumentError("scale factor must be a finite positive number")
    grid = state.grid.scaled(1.0 / s)
    comps = tuple(c.scaled(s) for c in state.components)
    return MomentumState(grid, math.sqrt(s) * state.amplitude, comps, state.label)


def save_state_csv(state: MomentumState, path) -> None:
    """Dump grid, weights and amplitude; panel edges go in a comment header."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("# order=%d edges=%s\n" % (state.grid.order, " ".join(format(e, ".17g") for e in state.grid.edges)))
        w = csv.writer(fh)
        w.writerow(["k", "weight", "re", "im"])
        for k, q, a in zip(state.grid_k, state.quadrature_weights, state.amplitude):
            w.writerow([format(k, ".17g"), format(q, ".17g"), format(a.real, ".17g"), format(a.imag, ".17g")])


def load_state_csv(path, label: str = "samples") -> MomentumState:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline()
        if not header.startswith("# order="):
            raise InvalidArgumentError("missing panel header in state file")
        meta = dict(part.split("=", 1) for part in header[1:].split(None, 1))
        order = int(meta["order"])
        edges = np.array([float(v) for v in meta["edges"].split()])
        rows = list(csv.DictReader(fh))
    grid = PanelGrid(edges, order)
    amp = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return MomentumState(grid, amp, (), label)


# ----------------------------------------------------------------- classical


@dataclass(frozen=True)
class ClassicalGridSpec:
    x_min: float = -10.0
    x_max: float = 10.0
    v_max: float = 40.0
    nx: int = 1024
    nv: int = 512
    order: int = 16
    t_pad: float = 0.375  # extra room on the right for shearing up to this time

    def x_grid(self) -> PanelGrid:
        width = (self.x_max - self.x_min) / (self.nx / self.order)
        right = self.x_max + self.v_max * self.t_pad
        return PanelGrid.covering(self.x_min, right, width, self.order, breakpoints=(0.0,))

    def v_grid(self) -> PanelGrid:
        return PanelGrid.uniform(0.0, self.v_max, max(1, self.nv // self.order), self.order)


@dataclass(frozen=True, eq=False)
class ClassicalState:
    x_grid: PanelGrid
    position_density: np.ndarray
    v_grid: PanelGrid
    velocity_density: np.ndarray

    def __post_init__(self):
        for name, grid, dens in (("position", self.x_grid, self.position_density),
                                 ("velocity", self.v_grid, self.velocity_density)):
            dens = np.asarray(dens, dtype=float)
            if dens.shape != grid.nodes.shape or np.any(dens < 0):
                raise InvalidArgumentError(f"{name} density must be nonnegative samples on its grid")
            total = float(np.sum(grid.weights * dens))
            if abs(total - 1.0) > NORM_TOL:
                raise InvalidArgumentError(f"{name} density integrates to {total!r}")
        if np.any(self.v_grid.nodes < 0) and np.any(self.velocity_density[self.v_grid.nodes < 0] != 0):
            raise InvalidArgumentError("velocity density must vanish for v < 0")


def _gaussian(x, mu, sigma):
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2)


def classical_state(position_peaks, position_width, velocity_center, velocity_width,
                    grid: ClassicalGridSpec | None = None) -> ClassicalState:
    """Equal-weight Gaussian position peaks times a Gaussian velocity density cut at v = 0."""
    grid = grid or ClassicalGridSpec()
    xg, vg = grid.x_grid(), grid.v_grid()
    rho = sum(_gaussian(xg.nodes, p, position_width) for p in position_peaks)
    g = np.where(vg.nodes >= 0, _gaussian(vg.nodes, velocity_center, velocity_width), 0.0)
    rho = rho / np.sum(xg.weights * rho)
    g = g / np.sum(vg.weights * g)
    return ClassicalState(xg, rho, vg, g)


def reference_classical_bus(grid: ClassicalGridSpec | None = None) -> ClassicalState:
    """Bus 2 units either side of the origin, heading right at about 20 units."""
    return classical_state((-2.0, 2.0), 0.6, 20.0, 4.0, grid)
