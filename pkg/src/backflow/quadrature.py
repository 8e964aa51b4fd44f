"""Composite Gauss-Legendre panels: nodes, weights, interpolation and partial integrals.

Every grid in the package (momentum, position, velocity, time) is a set of
panels, each carrying an ``order``-point Gauss-Legendre rule.  Values sampled
on the nodes can be interpolated inside a panel with the barycentric Lagrange
formula, which is what makes off-node evaluations spectrally accurate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError


@lru_cache(maxsize=None)
def _reference_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    # barycentric weights for the reference nodes
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / diff.prod(axis=1)
    bary /= np.abs(bary).max()
    return x, w, bary


def panel_edges(a: float, b: float, max_width: float, breakpoints=(0.0,)) -> np.ndarray:
    """Uniform-per-segment panel edges on [a, b] that include every breakpoint inside (a, b)."""
    if not (np.isfinite(a) and np.isfinite(b) and b > a):
        raise InvalidArgumentError(f"bad interval [{a}, {b}]")
    if not max_width > 0:
        raise InvalidArgumentError("panel width must be positive")
    cuts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    edges = [a]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(np.ceil((hi - lo) / max_width - 1e-9)))
        edges.extend(np.linspace(lo, hi, n + 1)[1:])
    return np.asarray(edges, dtype=float)


@dataclass(frozen=True, eq=False)
class PanelGrid:
    edges: np.ndarray
    order: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise InvalidArgumentError("panel edges must be strictly increasing")
        if self.order < 1:
            raise InvalidArgumentError("order must be >= 1")
        x, w, _ = _reference_rule(self.order)
        lo, hi = edges[:-1, None], edges[1:, None]
        half = 0.5 * (hi - lo)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "nodes", (half * x + 0.5 * (hi + lo)).ravel())
        object.__setattr__(self, "weights", (half * w).ravel())

    @classmethod
    def uniform(cls, a: float, b: float, n_panels: int, order: int) -> "PanelGrid":
        return cls(np.linspace(a, b, n_panels + 1), order)

    @classmethod
    def covering(cls, a, b, max_width, order=16, breakpoints=(0.0,)) -> "PanelGrid":
        return cls(panel_edges(a, b, max_width, breakpoints), order)

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def lower(self) -> float:
        return float(self.edges[0])

    @property
    def upper(self) -> float:
        return float(self.edges[-1])

    def scaled(self, factor: float) -> "PanelGrid":
        return PanelGrid(self.edges * factor, self.order)

    def has_edge(self, x: float, rtol: float = 1e-12) -> bool:
        scale = max(1.0, np.abs(self.edges).max())
        return bool(np.any(np.abs(self.edges - x) <= rtol * scale))

    def mask_below(self, x0: float) -> np.ndarray:
        return self.nodes < x0

    def interpolate(self, values: np.ndarray, xq, fill=0.0) -> np.ndarray:
        """Evaluate the panel-wise polynomial interpolant of ``values``.

        ``values`` has the node axis first.  ``xq`` is either 1-D (same points
        for every column) or has shape ``(p, m)`` matching ``values``'s columns,
        in which case column ``j`` is evaluated at ``xq[:, j]``.  Points outside
        the grid get ``fill``.
        """
        values = np.asarray(values)
        xq = np.asarray(xq, dtype=float)
        x_ref, _, bary = _reference_rule(self.order)
        n = self.order
        per_column = values.ndim == 2 and xq.ndim == 2
        inside = (xq >= self.edges[0]) & (xq <= self.edges[-1])
        # park outside points on a node; they are replaced by ``fill`` below
        xq = np.where(inside, xq, self.edges[0])
        idx = np.clip(np.searchsorted(self.edges, xq, side="right") - 1, 0, self.n_panels - 1)
        lo, hi = self.edges[idx], self.edges[idx + 1]
        s = (2.0 * xq - lo - hi) / (hi - lo)
        d = s[..., None] - x_ref  # (..., n)
        exact = d == 0.0
        d = np.where(exact, 1.0, d)
        c = bary / d
        take = idx[..., None] * n + np.arange(n)
        if per_column:
            cols = np.arange(values.shape[1])[None, :, None]
            local = values[take, cols]  # (p, m, n)
        else:
            local = values[take]  # (*xq.shape, n, *rest)
            if values.ndim > 1:
                c = c.reshape(c.shape + (1,) * (values.ndim - 1))
                exact = exact.reshape(exact.shape + (1,) * (values.ndim - 1))
        num = (c * local).sum(axis=xq.ndim)
        den = c.sum(axis=xq.ndim)
        out = num / den
        hit = exact.any(axis=xq.ndim)
        if np.any(hit):
            snapped = (np.where(exact, local, 0)).sum(axis=xq.ndim)
            out = np.where(hit, snapped, out)
        if values.ndim > 1 and not per_column:
            inside = inside.reshape(inside.shape + (1,) * (values.ndim - 1))
        return np.where(inside, out, fill)

    def integrate_columns(self, values: np.ndarray, lower, upper) -> np.ndarray:
        """Integral of each column's interpolant over [lower_j, upper_j]."""
        return self.column_integrator(values)(lower, upper)

    def column_integrator(self, values: np.ndarray):
        """Precompute panel sums of ``values`` and return ``f(lower, upper)``.

        Whole panels use the stored weights; the (at most two) partial panels
        per column are handled by resampling the interpolant onto a fresh
        Gauss-Legendre rule on the partial interval.
        """
        values = np.asarray(values)
        m = values.shape[1]
        x_ref, w_ref, _ = _reference_rule(self.order)
        panel_sums = (self.weights[:, None] * values).reshape(self.n_panels, self.order, m).sum(axis=1)
        csum = np.vstack([np.zeros((1, m), dtype=panel_sums.dtype), np.cumsum(panel_sums, axis=0)])
        cols = np.arange(m)

        def integrate(lower, upper):
            lower = np.clip(np.broadcast_to(np.asarray(lower, dtype=float), (m,)), self.lower, self.upper)
            upper = np.clip(np.broadcast_to(np.asarray(upper, dtype=float), (m,)), self.lower, self.upper)
            upper = np.maximum(upper, lower)
            total = np.zeros(m, dtype=np.result_type(values, float))
            first_full = np.searchsorted(self.edges, lower, side="left")
            last_full = np.searchsorted(self.edges, upper, side="right") - 1
            full = last_full > first_full
            total[full] += (csum[last_full, cols] - csum[first_full, cols])[full]

            def partial(a, b, sel):
                if not np.any(sel):
                    return
                a, b = a[sel], b[sel]
                half = 0.5 * (b - a)
                pts = half[None, :] * x_ref[:, None] + 0.5 * (a + b)[None, :]
                vals = self.interpolate(values[:, sel], pts)
                total[sel] += (w_ref[:, None] * vals).sum(axis=0) * half

            # pieces [lower, first edge] and [last edge, upper]
            spans_edge = last_full >= first_full
            left_end = np.where(spans_edge, self.edges[np.minimum(first_full, self.n_panels)], upper)
            partial(lower, left_end, left_end > lower)
            right_start = np.where(spans_edge, self.edges[np.clip(last_full, 0, self.n_panels)], upper)
            partial(right_start, upper, spans_edge & (upper > right_start))
            return total

        return integrate
