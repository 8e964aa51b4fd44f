"""Command-line entry point: ``backflow <verb> --config FILE [--out DIR]``.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 result outside the requested tolerance.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import classical, dynamics, spectral, states, wigner
from .config import ExperimentConfig, load_config
from .errors import ConfigError, InvalidArgumentError, NumericalError
from .output import OutputSet, Table, format_time

log = logging.getLogger("backflow")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 2, 3, 4


def quantum_state(cfg: ExperimentConfig) -> states.MomentumState:
    st = cfg.state
    if st.kind == "reference-quantum-bus":
        return states.reference_quantum_bus(cfg.momentum_grid)
    if st.kind == "gaussian-mixture":
        return states.build_momentum_state(st.components, cfg.momentum_grid)
    if st.kind == "optimal-eigenfunction":
        return spectral.export_optimal_state(spectral.solve_backflow(st.n, st.k_max), st.duration)
    raise ConfigError(f"{cfg.source}: this command needs a quantum state, not {st.kind!r}")


def classical_bus(cfg: ExperimentConfig) -> states.ClassicalState:
    st = cfg.state
    grid = cfg.phase_space.grid
    if st.kind == "reference-classical-bus":
        return states.reference_classical_bus(grid)
    if st.kind == "classical":
        return states.classical_state(st.position_peaks, st.position_width, st.velocity_center,
                                      st.velocity_width, grid)
    raise ConfigError(f"{cfg.source}: this command needs a classical state, not {st.kind!r}")


def _position_grid(cfg, state, times):
    if cfg.position_grid is not None:
        return cfg.position_grid.build()
    if not state.components:
        raise ConfigError(f"{cfg.source}: this state needs an explicit [position_grid]")
    t0, t1 = (times[0], times[-1]) if len(times) else (0.0, 0.0)
    return dynamics.auto_position_grid(state, t0, t1).build()


def cmd_quantum(cfg: ExperimentConfig, out: OutputSet) -> int:
    state = quantum_state(cfg)
    times = np.asarray(cfg.times, dtype=float)
    grid = _position_grid(cfg, state, times)
    series = dynamics.left_probability_series(state, times, grid)
    norms = []
    for t in times:
        field = dynamics.evolve(state, float(t), grid)
        norms.append(field.norm())
        out.add(f"density_t{format_time(t)}", Table.from_columns(x=field.grid_x, density=field.density))
    out.add("pleft", Table.from_columns(t=series.times, p_left=series.p_left))
    report = {"state": state.label, "n_times": len(times)}
    if len(times):
        report.update(max_norm_error=float(np.max(np.abs(np.asarray(norms) - 1.0))),
                      max_pair_error=float(np.max(np.abs(series.p_left + series.p_right - 1.0))),
                      p_left_initial=float(series.p_left[0]), p_left_max=float(series.p_left.max()),
                      t_at_max=float(series.times[int(np.argmax(series.p_left))]))
    out.add_report("summary", report)
    return EXIT_OK


def cmd_classical(cfg: ExperimentConfig, out: OutputSet) -> int:
    state = classical_bus(cfg)
    joint = classical.classical_joint(state)
    times = np.asarray(cfg.times, dtype=float)
    series = classical.classical_left_series(joint, times)
    stride = cfg.phase_space.stride
    report = {"n_times": len(times)}
    totals = []
    for t in times:
        grid = classical.shear_evolve(joint, float(t))
        totals.append(grid.total())
        out.add(f"density_t{format_time(t)}", Table.from_columns(x=grid.grid_x, density=grid.marginal_x()))
        if cfg.phase_space.export_surface:
            xs, vs = grid.grid_x[::stride], grid.grid_v[::stride]
            X, V = np.meshgrid(xs, vs, indexing="ij")
            out.add(f"joint_t{format_time(t)}",
                    Table.from_columns(x=X, v=V, density=grid.values[::stride, ::stride]))
    out.add("pleft", Table.from_columns(t=series.times, p_left=series.p_left))
    if len(times):
        steps = np.diff(series.p_left)
        report.update(max_total_error=float(np.max(np.abs(np.asarray(totals) - 1.0))),
                      max_increase=float(steps.max()) if steps.size else 0.0,
                      non_increasing=bool(steps.size == 0 or steps.max() <= 1e-8),
                      p_left_initial=float(series.p_left[0]), p_left_final=float(series.p_left[-1]))
    out.add_report("summary", report)
    return EXIT_OK


def _wigner_spec(cfg, state):
    if not state.components:
        raise ConfigError(f"{cfg.source}: the wigner command needs a Gaussian-mixture state")
    spec = wigner.auto_wigner_spec(state)
    w = cfg.wigner
    overrides = {k: getattr(w, k) for k in ("x_panel", "k_panel", "q_panel") if getattr(w, k) is not None}
    return replace(spec, **overrides)


def cmd_wigner(cfg: ExperimentConfig, out: OutputSet) -> int:
    state = quantum_state(cfg)
    spec = _wigner_spec(cfg, state)
    w0 = wigner.wigner_transform(state, spec, 0.0, method=cfg.wigner.method)
    times = np.asarray(cfg.times, dtype=float)
    quad = wigner.wigner_left_series(w0, times)
    direct = dynamics.left_probability_series(state, times)
    out.add("quadrants", Table.from_columns(t=quad.times, wigner_left=quad.p_left, wigner_right=quad.p_right,
                                            p_left=direct.p_left))
    rows = []
    for T in cfg.wigner.wedge_durations:
        wedge = wigner.wigner_wedge(w0, T)
        change = dynamics.left_probability_series(state, [0.0, T])
        rows.append((T, wedge, float(change.p_left[0] - change.p_left[1])))
    out.add("wedge", Table(("T", "wedge", "p_left_drop"), rows))
    stride = cfg.phase_space.stride
    if cfg.phase_space.export_surface:
        X, K = np.meshgrid(w0.grid_x[::stride], w0.grid_v[::stride], indexing="ij")
        vals = w0.values[::stride, ::stride]
        out.add("surface_t0", Table.from_columns(x=X, k=K, wigner=vals,
                                                 negative=w0.negative_mask()[::stride, ::stride].astype(int)))
    report = {"total": w0.total(), "min_value": float(w0.values.min()),
              "negative_fraction": float(w0.negative_mask().mean()),
              "marginal_error": w0.marginal_error, "imag_residue": w0.imag_residue}
    if len(times):
        report["max_quadrant_error"] = float(np.max(np.abs(quad.p_left - direct.p_left)))
    out.add_report("summary", report)
    return EXIT_OK


def cmd_bound(cfg: ExperimentConfig, out: OutputSet, tolerance: float | None = None) -> int:
    b = cfg.bound
    tol = b.tolerance if tolerance is None else tolerance
    solutions = []
    for n, k_max in b.schedule:
        sol = spectral.solve_backflow(n, k_max)
        log.info("N=%d k_max=%g lambda=%.12f (%s)", n, k_max, sol.eigenvalue, sol.method)
        solutions.append(sol)
    out.add("convergence", Table(("n", "k_max", "lambda", "residual"),
                                 [(s.n, s.k_max, s.eigenvalue, s.residual) for s in solutions]))
    last = solutions[-1]
    report = {}
    if len(solutions) >= 3 and len({s.k_max for s in solutions}) == 1:
        est = spectral.extrapolate_bound(solutions)
        value, error = est.value, est.error
        report["refinement_converged"] = est.converged
    else:
        value, error = last.eigenvalue, math.nan
        report["refinement_converged"] = False
    report.update(value=value, error=error, target=b.target, deviation=value - b.target, tolerance=tol)
    if b.tail_check and last.n >= 4:
        half = spectral.solve_backflow(last.n // 2, last.k_max / 2)
        tail = spectral.cutoff_sensitivity(last, half)
        report.update(tail_lambda_half_cutoff=tail["lambda_half"], tail_change=tail["change"],
                      tail_linear_estimate=tail["linear_tail_estimate"])
    out.add("eigenfunction", Table.from_columns(node=last.nodes, weight=last.weights, value=last.eigenvector))
    ok = abs(value - b.target) <= tol
    report["within_tolerance"] = ok
    out.add_report("summary", report)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_scalecheck(cfg: ExperimentConfig, out: OutputSet) -> int:
    state = quantum_state(cfg)
    sc = cfg.scalecheck
    rows = []
    for s in sc.factors:
        scaled = states.scale_state(state, s)
        t1, t2 = s * s * sc.t1, s * s * sc.t2
        rows.append((s, t1, t2, dynamics.backflow_amount(scaled, t1, t2)))
    out.add("scalecheck", Table(("s", "t1", "t2", "backflow"), rows))
    amounts = np.array([r[3] for r in rows])
    spread = float(amounts.max() - amounts.min())
    out.add_report("summary", {"spread": spread, "tolerance": sc.tolerance, "within_tolerance": spread <= sc.tolerance})
    return EXIT_OK if spread <= sc.tolerance else EXIT_TOLERANCE


COMMANDS = {"quantum": cmd_quantum, "classical": cmd_classical, "wigner": cmd_wigner, "bound": cmd_bound,
            "scalecheck": cmd_scalecheck}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="backflow", description="Probability backflow experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="experiment file (defaults are used when omitted)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--format", choices=("csv", "json"), help="table format (overrides the config)")
        p.add_argument("--threads", type=int, help="cap on BLAS/OpenMP threads")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "bound":
            p.add_argument("--tolerance", type=float, help="allowed |value - target|")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig(source="<defaults>")
        tolerance = getattr(args, "tolerance", None)
        if tolerance is not None and not (math.isfinite(tolerance) and tolerance > 0):
            raise ConfigError("--tolerance must be a positive number")
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out = OutputSet(args.out or cfg.output_directory, args.format or cfg.output_format)
        with threadpool_limits(limits=args.threads):
            if args.command == "bound":
                status = cmd_bound(cfg, out, tolerance)
            else:
                status = COMMANDS[args.command](cfg, out)
        for path in out.commit():
            log.info("wrote %s", path)
        return status
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
