"""Mean accuracy against the noise bound for one noise kind.

Accuracy is ``-log10(max(f - f_best, 1e-10))`` averaged over seeds; it
should fall as q_bar grows.

    python scripts/noise_accuracy.py --problems f6 --dims 10 --noise N3
"""

import argparse

from ilmbm.bench import ExperimentSpec, parse_noise, parse_problems, run_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problems", default="f6")
    ap.add_argument("--dims", default="10")
    ap.add_argument("--noise", default="N3")
    ap.add_argument("--qbar", default="0,0.0001,0.001,0.01")
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    spec = ExperimentSpec(parse_problems(args.problems), [int(v) for v in args.dims.split(",")],
                          parse_noise(args.noise), [float(v) for v in args.qbar.split(",")],
                          args.repeats, args.seed)
    table = summarize(run_experiment(spec, workers=args.workers))
    print(f"{'problem':>7} {'n':>5} {'noise':>5} {'q_bar':>8} {'runs':>4} {'accuracy':>8} {'evals':>8}")
    for c in table:
        acc = "" if c["mean_accuracy"] is None else f"{c['mean_accuracy']:8.2f}"
        print(f"{c['problem']:>7} {c['n']:5d} {c['noise']:>5} {c['q_bar']:8g} {c['runs']:4d} "
              f"{acc:>8} {c['mean_evaluations']:8.0f}")


if __name__ == "__main__":
    main()
