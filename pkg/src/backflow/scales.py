"""Physical constants, unit conventions and the reduction to dimensionless variables.

Quantum computations work in units where hbar = m = 1 and lengths are measured
in ``length_unit``:  x' = x/L,  k' = k L,  t' = hbar t / (m L^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

OXYGEN_MASS = 2.657e-26  # kg
HBAR = 1.054571817e-34  # J s


@dataclass(frozen=True)
class PhysicalScales:
    mass: float = OXYGEN_MASS
    planck_hbar: float = HBAR
    length_unit: float = 1.0e-5  # tens of microns
    time_unit: float = 1.0

    def __post_init__(self):
        for name in ("mass", "planck_hbar", "length_unit", "time_unit"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be a finite positive number, got {value!r}")
        if not self.k_unit > 0:
            raise InvalidArgumentError("derived wavenumber unit is not positive")

    @property
    def k_unit(self) -> float:
        """Wavenumber of a particle moving at one length unit per time unit."""
        return self.mass * (self.length_unit / self.time_unit) / self.planck_hbar

    @property
    def dimensionless_time_per_second(self) -> float:
        return self.planck_hbar / (self.mass * self.length_unit**2)


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("non-finite input")


def to_dimensionless(scales: PhysicalScales, x, t, k):
    """Map SI position (m), time (s), wavenumber (1/m) to dimensionless values."""
    _check_finite(x, t, k)
    L = scales.length_unit
    x_ = np.asarray(x, dtype=float) / L
    t_ = np.asarray(t, dtype=float) * (scales.planck_hbar / (scales.mass * L * L))
    k_ = np.asarray(k, dtype=float) * L
    return _unwrap(x_), _unwrap(t_), _unwrap(k_)


def from_dimensionless(scales: PhysicalScales, x, t, k):
    """Inverse of :func:`to_dimensionless`."""
    _check_finite(x, t, k)
    L = scales.length_unit
    x_ = np.asarray(x, dtype=float) * L
    t_ = np.asarray(t, dtype=float) / (scales.planck_hbar / (scales.mass * L * L))
    k_ = np.asarray(k, dtype=float) / L
    return _unwrap(x_), _unwrap(t_), _unwrap(k_)


def _unwrap(a):
    return float(a) if np.ndim(a) == 0 else a
