"""Wall-clock time and evaluations against dimension with exact information.

    python scripts/large_scale.py --problems f1,f5 --dims 100,500,1000,2000
"""

import argparse
import time

from ilmbm.bench import parse_problems
from ilmbm.problems import instantiate
from ilmbm.solver import SolverConfig, minimize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problems", default="f1,f4,f5")
    ap.add_argument("--dims", default="100,200,500,1000,2000")
    ap.add_argument("--stepsize", default="interpolated", choices=["unit", "interpolated"])
    ap.add_argument("--max-evals", type=int, default=10000)
    args = ap.parse_args()
    cfg = SolverConfig(stepsize_rule=args.stepsize, max_evals=args.max_evals)
    print(f"{'problem':>7} {'n':>6} {'seconds':>8} {'evals':>6} {'termination':>11} {'f - f_best':>10}")
    for pid in parse_problems(args.problems):
        for n in (int(v) for v in args.dims.split(",")):
            prob = instantiate(pid, n)
            t0 = time.perf_counter()
            rep = minimize(prob.oracle, prob.x_start, cfg)
            dt = time.perf_counter() - t0
            f = prob.value(rep.x_final)
            err = "" if prob.f_best is None else f"{f - prob.f_best:10.2e}"
            print(f"{pid:>7} {n:6d} {dt:8.2f} {rep.evaluations:6d} {rep.termination:>11} {err:>10}")


if __name__ == "__main__":
    main()
