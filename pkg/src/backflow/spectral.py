"""Nystrom discretization of the backflow eigenproblem.

The largest probability that can flow back across the origin during a unit
dimensionless time is the top eigenvalue of

    (K chi)(u) = integral_0^inf K(u, v) chi(v) dv,    K(u, v) = -sin(u^2 - v^2) / (pi (u - v)),

with the integral cut at ``k_max`` and replaced by composite Gauss-Legendre
quadrature.  Symmetrizing with square-root weights gives a real symmetric
matrix whose spectrum lies in roughly [-1, 0.04].
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, ExtrapolationError, InvalidArgumentError
from .quadrature import PanelGrid
from .states import MomentumState

log = logging.getLogger(__name__)

DENSE_LIMIT = 2000
RESIDUAL_TOL = 1e-10
NOISE_FLOOR = 1e-9
RAPID_RATIO = 0.05
_ORDERS = (10, 8, 6, 5, 4, 3, 2, 1)
_ROW_BLOCK = 512


def _kernel(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # sin(u^2 - v^2)/(u - v) = (u + v) sinc((u - v)(u + v)/pi): no 0/0 on the diagonal
    s = u + v
    return -(s / math.pi) * np.sinc((u - v) * s / math.pi)


def kernel_entry(u, v):
    """Backflow kernel K(u, v); continuous across u = v where it equals -2u/pi."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InvalidArgumentError("kernel arguments must be finite")
    if np.any(u < 0) or np.any(v < 0):
        raise InvalidArgumentError("kernel arguments must be nonnegative")
    out = _kernel(u, v)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    grid: PanelGrid
    matrix: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def k_max(self) -> float:
        return self.grid.upper


def panel_order(n: int) -> int:
    """Largest preferred Gauss-Legendre order that divides ``n``."""
    return next(p for p in _ORDERS if n % p == 0)


def kernel_grid(n: int, k_max: float) -> PanelGrid:
    # Uniform panels: the kernel oscillates with frequency ~2u, i.e. fastest
    # at the cutoff, so there is nothing to gain from crowding nodes near 0.
    order = panel_order(n)
    return PanelGrid.uniform(0.0, k_max, n // order, order)


def assemble(n: int, k_max: float) -> KernelMatrix:
    """M_ij = sqrt(w_i) K(u_i, u_j) sqrt(w_j) on an n-point grid over [0, k_max]."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidArgumentError("grid size must be an integer >= 2")
    if not (math.isfinite(k_max) and k_max > 0):
        raise InvalidArgumentError("k_max must be finite and positive")
    grid = kernel_grid(int(n), float(k_max))
    u, sw = grid.nodes, np.sqrt(grid.weights)
    m = np.empty((n, n))
    for start in range(0, n, _ROW_BLOCK):
        sl = slice(start, start + _ROW_BLOCK)
        m[sl] = sw[sl, None] * _kernel(u[sl, None], u[None, :]) * sw[None, :]
    # exact symmetry regardless of rounding in the block products
    m = 0.5 * (m + m.T)
    return KernelMatrix(grid, m)


def _dense_top(m: np.ndarray):
    n = m.shape[0]
    vals, vecs = scipy.linalg.eigh(m, subset_by_index=[n - 1, n - 1])
    return float(vals[0]), vecs[:, 0]


def _power_top(m: np.ndarray, tol: float, max_iter: int):
    """Power iteration on M + c I.

    The bulk of the spectrum sits near -1, so plain power iteration would lock
    onto it; shifting by half the magnitude of the most negative eigenvalue
    makes the top eigenvalue dominant.
    """
    n = m.shape[0]
    # rough lowest eigenvalue from a few unshifted steps (it dominates in modulus)
    y = np.ones(n) / math.sqrt(n)
    mu = 0.0
    for _ in range(30):
        z = m @ y
        mu = float(y @ z)
        y = z / np.linalg.norm(z)
    shift = max(0.5, -0.5 * mu)
    norm_m = max(abs(mu), 1e-300)
    x = np.linspace(1.0, 2.0, n)
    x /= np.linalg.norm(x)
    lam, residual = 0.0, np.inf
    for it in range(1, max_iter + 1):
        mx = m @ x
        lam = float(x @ mx)
        residual = float(np.linalg.norm(mx - lam * x))
        if residual <= tol * norm_m:
            return lam, x, it, residual
        y = mx + shift * x
        x = y / np.linalg.norm(y)
    raise ConvergenceError(f"shifted power iteration stalled at residual {residual:.3g} (lambda {lam:.12g})",
                           iterations=max_iter, residual=residual)


def max_eigenvalue(matrix, method: str = "auto", tol: float = RESIDUAL_TOL, max_iter: int = 20000):
    """Largest eigenvalue of a symmetric matrix and its unit eigenvector.

    ``method`` is "dense", "power" or "auto" (dense up to DENSE_LIMIT rows).
    The eigenvector sign is fixed so that its largest-magnitude entry is positive.
    """
    m = matrix.matrix if isinstance(matrix, KernelMatrix) else np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.all(np.isfinite(m)):
        raise InvalidArgumentError("need a finite square matrix")
    if method == "auto":
        method = "dense" if m.shape[0] <= DENSE_LIMIT else "power"
    if method == "dense":
        lam, vec = _dense_top(m)
    elif method == "power":
        lam, vec, iters, _ = _power_top(m, tol, max_iter)
        log.debug("power iteration converged in %d steps", iters)
    else:
        raise InvalidArgumentError(f"unknown eigensolver {method!r}")
    i = int(np.argmax(np.abs(vec)))
    if vec[i] < 0:
        vec = -vec
    return lam, vec


@dataclass(frozen=True, eq=False)
class BackflowSolution:
    eigenvalue: float
    eigenvector: np.ndarray  # chi at the nodes, sum(w chi^2) = 1
    grid: PanelGrid
    residual: float
    method: str
    extrapolated_value: float | None = None

    @property
    def n(self) -> int:
        return self.grid.size

    @property
    def k_max(self) -> float:
        return self.grid.upper

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights


def solve_backflow(n: int, k_max: float, method: str = "auto") -> BackflowSolution:
    km = assemble(n, k_max)
    lam, vec = max_eigenvalue(km, method)
    residual = float(np.linalg.norm(km.matrix @ vec - lam * vec))
    if not 0.0 < lam < 1.0:
        raise ConvergenceError(f"top eigenvalue {lam!r} outside (0, 1)", iterations=0, residual=residual)
    chi = vec / np.sqrt(km.weights)
    used = method if method != "auto" else ("dense" if n <= DENSE_LIMIT else "power")
    return BackflowSolution(lam, chi, km.grid, residual, used)


@dataclass(frozen=True)
class BoundEstimate:
    value: float
    error: float
    raw: tuple
    converged: bool  # refinement already at the noise floor

    def __iter__(self):
        yield self.value
        yield self.error


def extrapolate_bound(solutions, noise_floor: float = NOISE_FLOOR) -> BoundEstimate:
    """Richardson extrapolation in 1/N of the last three solves.

    Solves must share k_max and have increasing N.  The finest value is
    returned as is when the last refinement is below ``noise_floor`` or has
    shrunk by more than 1/RAPID_RATIO: Gauss-Legendre converges faster than
    any power of 1/N once the kernel is resolved, and the sign of such small
    steps carries no information.  Otherwise the geometric tail of the
    differences is summed.  Differences that grow, or flip sign without
    shrinking fast, are rejected.
    """
    values = [s.eigenvalue if isinstance(s, BackflowSolution) else float(s) for s in solutions]
    if len(values) < 3:
        raise InvalidArgumentError("extrapolation needs at least three solves")
    if all(isinstance(s, BackflowSolution) for s in solutions):
        ns = [s.n for s in solutions]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidArgumentError("solves must be ordered by increasing N")
        if len({s.k_max for s in solutions}) != 1:
            raise InvalidArgumentError("solves must share k_max")
    l1, l2, l3 = values[-3:]
    d1, d2 = l2 - l1, l3 - l2
    raw = tuple(values)
    if abs(d2) <= noise_floor or abs(d2) <= RAPID_RATIO * abs(d1):
        return BoundEstimate(l3, max(abs(d2), noise_floor), raw, True)
    if d1 * d2 > 0 and abs(d2) < abs(d1):
        r = d1 / d2
        tail = d2 / (r - 1.0)
        return BoundEstimate(l3 + tail, abs(tail), raw, False)
    raise ExtrapolationError(f"refinement is not monotone: {values}", raw=raw)


def cutoff_sensitivity(full: BackflowSolution, half: BackflowSolution) -> dict:
    """Compare solves at k_max and k_max/2 (same node density).

    Reports the raw change and a first-order 1/k_max extrapolation.  This is a
    diagnostic only; the truncation error is not removed from the bound.
    """
    change = full.eigenvalue - half.eigenvalue
    return {
        "k_max": full.k_max,
        "half_k_max": half.k_max,
        "lambda": full.eigenvalue,
        "lambda_half": half.eigenvalue,
        "change": change,
        "linear_tail_estimate": full.eigenvalue + change,
    }


def export_optimal_state(solution: BackflowSolution, duration: float = 1.0,
                         label: str = "optimal-eigenfunction") -> MomentumState:
    """Momentum state whose backflow over [0, duration] equals the eigenvalue.

    The kernel variable u relates to the wavenumber by k = 2 u / sqrt(duration),
    and the chirp exp(i k^2 duration / 4) moves the optimal window from
    [-duration/2, duration/2] to [0, duration].
    """
    if not (math.isfinite(duration) and duration > 0):
        raise InvalidArgumentError("duration must be positive")
    s = 2.0 / math.sqrt(duration)
    grid = solution.grid.scaled(s)
    k = grid.nodes
    amp = np.exp(0.25j * k * k * duration) * solution.eigenvector / math.sqrt(s)
    return MomentumState(grid, amp, (), label)
