"""Grid convergence of the backflow eigenvalue in N and k_max.

Prints one CSV row per solve, then for each cutoff the N-extrapolated value
and, between successive cutoffs, the linear 1/k_max tail estimate.

    python scripts/convergence_study.py [--n 500 1000 2000 4000] [--k-max 10 20 30 40]
"""
import argparse
import csv
import sys
import time

from backflow.errors import ExtrapolationError
from backflow.spectral import extrapolate_bound, solve_backflow


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[500, 1000, 2000, 4000])
    ap.add_argument("--k-max", type=float, nargs="+", default=[10.0, 20.0, 30.0, 40.0])
    args = ap.parse_args()
    out = csv.writer(sys.stdout)
    out.writerow(["n", "k_max", "lambda", "residual", "method", "seconds"])
    limits = {}
    for k_max in sorted(args.k_max):
        sols = []
        for n in sorted(args.n):
            start = time.perf_counter()
            sol = solve_backflow(n, k_max)
            out.writerow([n, k_max, f"{sol.eigenvalue:.12f}", f"{sol.residual:.2e}", sol.method,
                          f"{time.perf_counter() - start:.2f}"])
            sys.stdout.flush()
            sols.append(sol)
        if len(sols) >= 3:
            try:
                limits[k_max] = extrapolate_bound(sols).value
            except ExtrapolationError as exc:
                print(f"# k_max = {k_max}: {exc}", file=sys.stderr)
    print()
    out.writerow(["k_max", "extrapolated_in_n", "tail_estimate_from_half"])
    for k_max, value in limits.items():
        half = limits.get(k_max / 2)
        out.writerow([k_max, f"{value:.12f}", "" if half is None else f"{2 * value - half:.12f}"])


if __name__ == "__main__":
    main()
