"""Exact-information grid: f1-f10 at n = 2, 5, 10, 50 under both stepsize rules.

Prints the final error per instance, the number of instances solved to 1e-3
and the number of runtime invariant violations.

    python scripts/exact_grid.py --rules unit,interpolated --dims 2,5,10,50
"""

import argparse
import time
from collections import Counter

from ilmbm.problems import PROBLEM_IDS, instantiate
from ilmbm.solver import SolverConfig, minimize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rules", default="interpolated,unit")
    ap.add_argument("--dims", default="2,5,10,50")
    ap.add_argument("--tol", type=float, default=1e-3)
    args = ap.parse_args()
    dims = [int(v) for v in args.dims.split(",")]
    for rule in args.rules.split(","):
        t0 = time.perf_counter()
        solved = 0
        violations = Counter()
        print(f"== stepsize rule: {rule}")
        print("problem " + " ".join(f"{'n=' + str(n):>22}" for n in dims))
        for pid in PROBLEM_IDS:
            cells = []
            for n in dims:
                prob = instantiate(pid, n)
                rep = minimize(prob.oracle, prob.x_start, SolverConfig(stepsize_rule=rule))
                err = prob.value(rep.x_final) - prob.f_best
                solved += err <= args.tol
                violations.update(rep.violations)
                cells.append(f"{err:9.1e} {rep.evaluations:5d} {rep.termination[:3]:>4}")
            print(f"{pid:7} " + " ".join(f"{c:>22}" for c in cells))
        total = len(PROBLEM_IDS) * len(dims)
        print(f"solved {solved}/{total} to {args.tol:g}; {time.perf_counter() - t0:.1f}s; "
              f"invariant violations: {sum(violations.values())}")


if __name__ == "__main__":
    main()
