"""Search for the canonical two-component quantum bus.

Parameters: (k1, w1, x1, k2, w2, x2, phase).  For each candidate the mixing
angle between the unit-normalized components is fixed by root finding so that
P_left(0) = 1/2; the objective is the largest probability gained by x < 0
at any time up to HORIZON, from the cumulative time-integrated current.  Both
Gaussians are kept at least MIN_SIGMAS widths away from k = 0 and k = K_MAX so
that the hard truncation leaves position tails far below 1e-9.

Coarse random sampling of the box below, then Nelder-Mead from the best few
samples.  Backflow amounts are invariant under phi(k) -> sqrt(s) phi(s k)
with times scaled by s^2, so the optimum is finally rescaled to put the peak
at PEAK_TIME.  The printed components are pasted into backflow/states.py.

    python scripts/tune_reference_bus.py [--samples 1500] [--seed 0]
"""
import argparse
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq, minimize

from backflow.dynamics import PositionGridSpec, auto_position_grid, current_at, left_probability_series, propagate
from backflow.states import REFERENCE_BUS_GRID, GaussianComponent, MomentumGridSpec, build_momentum_state

HORIZON = 0.004
PEAK_TIME = 0.002
N_STARTS = 6
K_MAX = 60.0
MIN_SIGMAS = 6.5
GRID = MomentumGridSpec(K_MAX, 1024)
BOX = [(5, 30), (0.5, 6), (-1, 1), (25, 55), (0.5, 6), (-1, 1), (0, 2 * math.pi)]


def components(p, r):
    k1, w1, x1, k2, w2, x2, phase = p
    a = math.cos(r) / math.sqrt(w1 * math.sqrt(2 * math.pi))
    b = math.sin(r) * complex(math.cos(phase), math.sin(phase)) / math.sqrt(w2 * math.sqrt(2 * math.pi))
    return [GaussianComponent(complex(a), k1, w1, x1), GaussianComponent(b, k2, w2, x2)]


def balanced(p, grid=GRID):
    """Mixing angles in (0, pi) giving P_left(0) = 1/2.

    P_left is a ratio of two Hermitian forms in the component coefficients,
    so only the 2x2 left-overlap and Gram matrices are needed.
    """
    unit = components(p, 0.0)[0], components(p, math.pi / 2)[1]
    states = [build_momentum_state([c], grid) for c in unit]
    x_grid = auto_position_grid(states[0], 0.0).build()
    span = auto_position_grid(states[1], 0.0)
    x_grid = PositionGridSpec(min(x_grid.lower, span.x_min), max(x_grid.upper, span.x_max), span.panel_width).build()
    psi = np.stack([propagate(s, x_grid.nodes, [0.0])[:, 0] for s in states], axis=1)
    w = x_grid.weights[:, None] * psi
    gram = psi.conj().T @ w
    left = psi[x_grid.nodes < 0].conj().T @ w[x_grid.nodes < 0]
    form = left - 0.5 * gram

    def excess(r):
        v = np.array([math.cos(r), math.sin(r)])
        return float(np.real(v @ form @ v))

    rs = np.linspace(1e-3, math.pi - 1e-3, 65)
    f = [excess(r) for r in rs]
    return [brentq(excess, a, b, xtol=1e-14) for a, b, fa, fb in zip(rs[:-1], rs[1:], f[:-1], f[1:]) if fa * fb < 0]


def peak_backflow(state, n_times=401):
    """(max over t <= HORIZON of P_left(t) - P_left(0), argmax t)."""
    times = np.linspace(0.0, HORIZON, n_times)
    gained = -cumulative_trapezoid(current_at(state, times), times, initial=0.0)
    i = int(np.argmax(gained))
    return float(gained[i]), float(times[i])


def best_root(p, grid=GRID):
    """(backflow, mixing angle) of the best balanced mixture, or (None, None)."""
    best = (None, None)
    for r in balanced(p, grid):
        value, _ = peak_backflow(build_momentum_state(components(p, r), grid))
        if best[0] is None or value > best[0]:
            best = (value, r)
    return best


def penalty(p):
    k1, w1, _, k2, w2, _, _ = p
    if min(w1, w2) <= 0:
        return 1.0
    room = [k1 - MIN_SIGMAS * w1, K_MAX - k1 - MIN_SIGMAS * w1, k2 - MIN_SIGMAS * w2, K_MAX - k2 - MIN_SIGMAS * w2]
    return 0.01 * sum(max(0.0, -v) for v in room)


def objective(p):
    pen = penalty(p)
    if pen >= 1.0:
        return 1.0
    value, _ = best_root(p)
    return 1.0 if value is None else -value + pen


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    scored = []
    for i in range(args.samples):
        p = [rng.uniform(lo, hi) for lo, hi in BOX]
        scored.append((objective(p), i, p))
    scored.sort()
    best = None
    for f0, i, p0 in scored[:N_STARTS]:
        res = minimize(objective, p0, method="Nelder-Mead",
                       options=dict(maxiter=3000, xatol=1e-5, fatol=1e-10))
        print(f"start {i}: {-f0:.6f} -> {-res.fun:.6f}", flush=True)
        if best is None or res.fun < best.fun:
            best = res
    p = [round(v, 4) for v in best.x]
    p[6] = round(p[6] % (2 * math.pi), 4)
    _, r = best_root(p, MomentumGridSpec())
    comps = components(p, r)
    state = build_momentum_state(comps, MomentumGridSpec())
    value, t_peak = peak_backflow(state, 4001)
    print(f"peak backflow {value:.6f} at t = {t_peak:.6f}")
    s = math.sqrt(PEAK_TIME / t_peak)
    comps = [GaussianComponent(c.weight, round(c.center_k / s, 4), round(c.width_k / s, 4), round(c.phase_x0 * s, 4))
             for c in comps]
    state = build_momentum_state(comps, REFERENCE_BUS_GRID)
    value, t_peak = peak_backflow(state, 4001)
    print(f"rescaled by {s:.6f}: peak backflow {value:.6f} at t = {t_peak:.6f}")
    print(f"P_left(0) = {left_probability_series(state, [0.0]).p_left[0]:.12f}")
    for c in comps:
        w = complex(c.weight)
        print(f"    GaussianComponent(complex({w.real:.10f}, {w.imag:.10f}), {c.center_k}, {c.width_k}, {c.phase_x0}),")


if __name__ == "__main__":
    main()
