"""Seeded benchmark grids over the test problems with CSV output.

Usage::

    bench run --problems f1..f10 --dims 2,5,10 --noise N0,N3 --qbar 0.001,0.01 \\
        --repeats 10 --seed 42 --out results.csv

Every grid cell ``(problem, n, noise, q_bar, seed)`` yields one :class:`ResultRow`.
``f_final_true`` is an extra exact evaluation at the returned point and does
not count against the solver budget. ``rel_error`` is
``(f_final_true - f_best) / (1 + |f_best|)`` clamped below at 0, and
``accuracy`` is ``-log10(max(f_final_true - f_best, 1e-10))``; both are empty
when no best-known value exists for the instance.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import re
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import click

from .oracle import NOISE_KINDS, NoiseSpec, wrap_noise
from .problems import PROBLEM_IDS, instantiate
from .solver import SolverConfig, minimize

log = logging.getLogger(__name__)

ACCURACY_FLOOR = 1e-10


@dataclass
class ExperimentSpec:
    problems: list
    dims: list
    noise_kinds: list = field(default_factory=lambda: ["N0"])
    q_bars: list = field(default_factory=lambda: [0.0])
    repeats: int = 10
    base_seed: int = 0
    config: SolverConfig = field(default_factory=SolverConfig)
    f10_norm: str = "euclidean"

    def __post_init__(self):
        for p in self.problems:
            if p not in PROBLEM_IDS:
                raise ValueError(f"unknown problem {p!r}")
        for k in self.noise_kinds:
            if k not in NOISE_KINDS:
                raise ValueError(f"unknown noise kind {k!r}")
        if any(int(n) < 2 for n in self.dims):
            raise ValueError("dimensions must be at least 2")
        if any(not q >= 0 for q in self.q_bars):
            raise ValueError("q_bar values must be nonnegative")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")

    def cells(self):
        """Grid cells in output order.

        N0 is deterministic, so it contributes a single run with ``q_bar = 0``
        per ``(problem, n)`` regardless of ``q_bars`` and ``repeats``.
        """
        out = []
        for p in self.problems:
            for n in self.dims:
                for kind in self.noise_kinds:
                    if kind == "N0":
                        out.append((p, int(n), kind, 0.0, self.base_seed))
                        continue
                    for q in self.q_bars:
                        for i in range(self.repeats):
                            out.append((p, int(n), kind, float(q), self.base_seed + i))
        return out


@dataclass
class ResultRow:
    problem: str
    n: int
    noise: str
    q_bar: float
    seed: int
    f_final_noisy: float
    f_final_true: float
    rel_error: Optional[float]
    accuracy: Optional[float]
    evaluations: int
    cpu_seconds: float
    termination: str


FIELDS = tuple(f.name for f in dataclasses.fields(ResultRow))
_INT_FIELDS = {"n", "seed", "evaluations"}
_STR_FIELDS = {"problem", "noise", "termination"}


def accuracy(f, f_best):
    """``-log10(max(f - f_best, 1e-10))``; at most 10."""
    return -math.log10(max(f - f_best, ACCURACY_FLOOR))


def rel_error(f, f_best):
    return max((f - f_best) / (1.0 + abs(f_best)), 0.0)


# -- running ------------------------------------------------------------------


_REFERENCE_POINTS: dict = {}


def reference_point(pid, n, config: SolverConfig, f10_norm="euclidean"):
    """Noiseless solution used as ``x_star`` when the problem has no closed form.

    Cached per process; the key includes the solver configuration.
    """
    cfg = dataclasses.replace(config, q_bar=0.0, trace=False)
    key = (pid, int(n), repr(cfg), f10_norm)
    if key not in _REFERENCE_POINTS:
        prob = instantiate(pid, n, f10_norm=f10_norm)
        _REFERENCE_POINTS[key] = minimize(prob.oracle, prob.x_start, cfg).x_final
    return _REFERENCE_POINTS[key].copy()


def run_cell(pid, n, kind, q_bar, seed, config: SolverConfig, f10_norm="euclidean",
             trace=False):
    """Run one grid cell; return ``(row, trace_records)``."""
    prob = instantiate(pid, n, f10_norm=f10_norm)
    try:
        x_star = prob.x_star
        if kind in ("N2", "N4") and x_star is None:
            x_star = reference_point(pid, n, config, f10_norm)
        spec = NoiseSpec(kind, q_bar if kind != "N0" else 0.0, seed, x_star)
        oracle = wrap_noise(prob.oracle, spec)
        cfg = dataclasses.replace(config, q_bar=spec.q_bar, trace=trace)
        t0 = time.perf_counter()
        rep = minimize(oracle, prob.x_start, cfg)
        elapsed = time.perf_counter() - t0
        f_true = prob.value(rep.x_final)
    except Exception as exc:  # one failed run must not stop the grid
        log.warning("run %s n=%d %s q=%g seed=%d failed: %s", pid, n, kind, q_bar, seed, exc)
        row = ResultRow(pid, n, kind, q_bar, seed, math.nan, math.nan, None, None, 0,
                        0.0, "error")
        return row, []
    rel = acc = None
    if prob.f_best is not None:
        if f_true < prob.f_best:
            log.warning("%s n=%d: f=%.17g below best known %.17g", pid, n, f_true, prob.f_best)
        rel = rel_error(f_true, prob.f_best)
        acc = accuracy(f_true, prob.f_best)
    row = ResultRow(pid, n, kind, q_bar, seed, float(rep.f_final), float(f_true), rel, acc,
                    rep.evaluations, elapsed, rep.termination)
    return row, rep.trace


def _run_star(args):
    return run_cell(*args)


def run_experiment(spec: ExperimentSpec, out=None, workers=1, trace_out=None):
    """Run every cell of ``spec``; rows are appended to ``out`` as they finish.

    Parameters
    ----------
    spec : ExperimentSpec
    out : path-like, optional
        CSV destination; written incrementally, header first.
    workers : int
        Number of worker processes. Row order is the cell order either way.
    trace_out : path-like, optional
        JSON-lines file receiving per-iteration records of every run.

    Returns
    -------
    list of ResultRow
    """
    cells = spec.cells()
    trace = trace_out is not None
    jobs = [(p, n, k, q, s, spec.config, spec.f10_norm, trace) for p, n, k, q, s in cells]
    rows = []
    fh = open(out, "w", newline="", encoding="utf-8") if out is not None else None
    th = open(trace_out, "w", encoding="utf-8") if trace else None
    try:
        writer = None
        if fh is not None:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(FIELDS)
            fh.flush()
        if workers > 1 and len(jobs) > 1:
            pool = ProcessPoolExecutor(max_workers=workers)
            results = pool.map(_run_star, jobs)
        else:
            pool = None
            results = map(_run_star, jobs)
        try:
            for row, records in results:
                rows.append(row)
                if writer is not None:
                    writer.writerow(format_row(row))
                    fh.flush()
                if th is not None:
                    key = {"problem": row.problem, "n": row.n, "noise": row.noise,
                           "q_bar": row.q_bar, "seed": row.seed}
                    for rec in records:
                        th.write(json.dumps({**key, **rec}) + "\n")
        finally:
            if pool is not None:
                pool.shutdown()
    finally:
        if fh is not None:
            fh.close()
        if th is not None:
            th.close()
    return rows


# -- CSV ----------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def format_row(row: ResultRow):
    return [_fmt(getattr(row, name)) for name in FIELDS]


def _parse(name, text):
    if name in _STR_FIELDS:
        return text
    if name in _INT_FIELDS:
        return int(text)
    return None if text == "" else float(text)


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != FIELDS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [ResultRow(**{k: _parse(k, v) for k, v in rec.items()}) for rec in reader]


# -- summaries ----------------------------------------------------------------


def summarize(rows: Iterable[ResultRow]):
    """Per-cell statistics over seeds.

    Returns a list of dicts with keys ``problem, n, noise, q_bar, runs,
    mean_f_true, std_f_true, mean_accuracy, mean_evaluations``. The standard
    deviation uses divisor ``N - 1`` and is ``None`` for single-run cells.
    Error rows are left out of the statistics.
    """
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.problem, r.n, r.noise, r.q_bar), []).append(r)
    table = []
    for (p, n, kind, q), rs in groups.items():
        ok = [r for r in rs if r.termination != "error"]
        vals = [r.f_final_true for r in ok]
        accs = [r.accuracy for r in ok if r.accuracy is not None]
        table.append({
            "problem": p, "n": n, "noise": kind, "q_bar": q, "runs": len(ok),
            "mean_f_true": statistics.fmean(vals) if vals else None,
            "std_f_true": statistics.stdev(vals) if len(vals) > 1 else None,
            "mean_accuracy": statistics.fmean(accs) if accs else None,
            "mean_evaluations": statistics.fmean(r.evaluations for r in ok) if ok else None,
        })
    return table


# -- CLI ----------------------------------------------------------------------


def parse_problems(text):
    """``"f1..f10"``, ``"f1,f6,f8"``, mixtures of both or ``"all"``."""
    if text.strip() == "all":
        return list(PROBLEM_IDS)
    out = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"f(\d+)\.\.f(\d+)", part)
        if m:
            out += [f"f{i}" for i in range(int(m.group(1)), int(m.group(2)) + 1)]
        elif part:
            out.append(part)
    bad = [p for p in out if p not in PROBLEM_IDS]
    if bad:
        raise click.BadParameter(f"unknown problems {bad}")
    return out


def parse_noise(text):
    m = re.fullmatch(r"N(\d)\.\.N(\d)", text.strip())
    kinds = [f"N{i}" for i in range(int(m.group(1)), int(m.group(2)) + 1)] if m else \
        [k.strip() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in NOISE_KINDS]
    if bad:
        raise click.BadParameter(f"unknown noise kinds {bad}")
    return kinds


def _list(conv):
    def parse(ctx, param, value):
        try:
            return [conv(v) for v in value.split(",") if v.strip()]
        except ValueError as exc:
            raise click.BadParameter(str(exc)) from exc
    return parse


@click.group()
@click.option("-v", "--verbose", count=True)
def main(verbose):
    """Benchmark grids for the inexact limited memory bundle solver."""
    logging.basicConfig(level=logging.WARNING - 10 * verbose,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--problems", default="f1..f10", show_default=True)
@click.option("--dims", default="2,5,10", show_default=True, callback=_list(int))
@click.option("--noise", default="N0", show_default=True)
@click.option("--qbar", default="0", show_default=True, callback=_list(float))
@click.option("--repeats", default=10, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--trace", is_flag=True, help="Write per-iteration records to OUT.trace.jsonl.")
@click.option("--stepsize", type=click.Choice(["unit", "interpolated"]), default="interpolated",
              show_default=True)
@click.option("--max-evals", default=10000, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--f10-norm", type=click.Choice(["euclidean", "l1"]), default="euclidean",
              show_default=True)
@click.option("--keep-going", is_flag=True, help="Exit 0 even when some runs failed.")
def run(problems, dims, noise, qbar, repeats, seed, out, trace, stepsize, max_evals, workers,
        f10_norm, keep_going):
    """Run a grid and write one CSV row per (problem, n, noise, q_bar, seed)."""
    try:
        spec = ExperimentSpec(parse_problems(problems), dims, parse_noise(noise), qbar, repeats,
                              seed, SolverConfig(stepsize_rule=stepsize, max_evals=max_evals),
                              f10_norm)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    trace_out = Path(out).with_suffix(".trace.jsonl") if trace else None
    rows = run_experiment(spec, out, workers=workers, trace_out=trace_out)
    failed = sum(r.termination == "error" for r in rows)
    click.echo(f"{len(rows)} rows written to {out} ({failed} failed)", err=True)
    if failed and not keep_going:
        sys.exit(1)


@main.command("summarize")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
def summarize_cmd(csv_path):
    """Print per-cell means and standard deviations of a results file."""
    table = summarize(read_csv(csv_path))
    cols = ["problem", "n", "noise", "q_bar", "runs", "mean_f_true", "std_f_true",
            "mean_accuracy", "mean_evaluations"]
    click.echo("\t".join(cols))
    for rec in table:
        click.echo("\t".join("" if rec[c] is None else
                             (f"{rec[c]:.6g}" if isinstance(rec[c], float) else str(rec[c]))
                             for c in cols))


if __name__ == "__main__":
    main()
