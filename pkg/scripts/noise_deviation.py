"""Standard deviation of final true values over seeds, per noise kind and level.

A desk-scale version of the deviation table: for each noise kind N1-N4 and
bound q_bar, run ``--repeats`` seeds of every problem and report the mean over
problems of the per-problem sample standard deviation.

    python scripts/noise_deviation.py --problems f1,f6,f8 --dims 10 --out dev.csv
"""

import argparse
import statistics
from collections import defaultdict

from ilmbm.bench import ExperimentSpec, parse_noise, parse_problems, run_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problems", default="f1,f6,f8")
    ap.add_argument("--dims", default="10")
    ap.add_argument("--noise", default="N1..N4")
    ap.add_argument("--qbar", default="0.0001,0.001,0.01")
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None, help="optional CSV with every run")
    args = ap.parse_args()
    spec = ExperimentSpec(parse_problems(args.problems), [int(v) for v in args.dims.split(",")],
                          parse_noise(args.noise), [float(v) for v in args.qbar.split(",")],
                          args.repeats, args.seed)
    table = summarize(run_experiment(spec, args.out, workers=args.workers))
    per = defaultdict(list)
    for cell in table:
        if cell["std_f_true"] is not None:
            per[(cell["n"], cell["noise"], cell["q_bar"])].append(cell["std_f_true"])
    print(f"{'n':>5} {'noise':>5} {'q_bar':>8} {'mean std':>10}  per problem")
    for (n, kind, q), stds in sorted(per.items()):
        print(f"{n:5d} {kind:>5} {q:8g} {statistics.fmean(stds):10.2e}  "
              + " ".join(f"{s:.1e}" for s in stds))


if __name__ == "__main__":
    main()
