"""Nonsmooth nonconvex test problems f1-f10.

f1-f5 are the large-scale academic problems of Haarala, Miettinen and Makela;
f6-f10 are Ferrier polynomials built from ``h_i(x) = i x_i^2 - 2 x_i + sum(x)``.
Every oracle returns the value and one Clarke subgradient. At kinks the
convention is ``sign(0) = 0`` and, for max-type functions, the lowest-index
maximizing branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

PROBLEM_IDS = tuple(f"f{i}" for i in range(1, 11))

# best known values of f3 by dimension
F3_BEST = {
    2: -1.0,
    5: -2.98,
    10: -6.51,
    20: -13.58,
    50: -34.80,
    100: -70.15,
    200: -140.86,
    500: -352.99,
    1000: -706.54,
    2000: -1413.65,
}


def _alternating(n, odd, even):
    # 1-based odd positions get ``odd``
    x = np.full(n, float(even))
    x[0::2] = odd
    return x


def _two_largest_gap(v):
    if v.size < 2:
        return np.inf
    top = np.partition(v, -2)[-2:]
    return float(top[1] - top[0])


# -- f1 .. f5 --------------------------------------------------------------


def f1(x):
    s = x.sum()
    terms = np.empty(x.size + 1)
    terms[0] = -s
    terms[1:] = x
    vals = np.log1p(np.abs(terms))
    j = int(np.argmax(vals))
    dg = np.sign(terms[j]) / (abs(terms[j]) + 1.0)
    if j == 0:
        g = np.full(x.size, -dg)
    else:
        g = np.zeros(x.size)
        g[j - 1] = dg
    return float(vals[j]), g


def _f1_margin(x):
    terms = np.concatenate([[-x.sum()], x])
    vals = np.log1p(np.abs(terms))
    return min(_two_largest_gap(vals), float(np.min(np.abs(terms))))


def f2(x):
    a, b = x[:-1], x[1:]
    aa, ab = np.abs(a), np.abs(b)
    pa, pb = b * b + 1.0, a * a + 1.0
    t1 = aa**pa
    t2 = ab**pb
    with np.errstate(divide="ignore", invalid="ignore"):
        la = np.where(aa > 0, np.log(aa), 0.0)
        lb = np.where(ab > 0, np.log(ab), 0.0)
    g = np.zeros(x.size)
    g[:-1] += pa * aa ** (pa - 1.0) * np.sign(a) + t2 * lb * 2.0 * a
    g[1:] += pb * ab ** (pb - 1.0) * np.sign(b) + t1 * la * 2.0 * b
    return float(t1.sum() + t2.sum()), g


def _f2_margin(x):
    return float(np.min(np.abs(x)))


def f3(x):
    a, b = x[:-1], x[1:]
    r = a * a + b * b - 1.0
    val = np.sum(-a + 2.0 * r + 1.75 * np.abs(r))
    sr = np.sign(r)
    g = np.zeros(x.size)
    g[:-1] += -1.0 + 4.0 * a + 3.5 * sr * a
    g[1:] += 4.0 * b + 3.5 * sr * b
    return float(val), g


def _f3_margin(x):
    a, b = x[:-1], x[1:]
    return float(np.min(np.abs(a * a + b * b - 1.0)))


def _f45_branches(x):
    a, b = x[:-1], x[1:]
    c = (b - 1.0) ** 2
    A = a * a + c + b - 1.0
    B = -a * a - c + b + 1.0
    return a, b, A, B


def f4(x):
    a, b, A, B = _f45_branches(x)
    sa, sb = A.sum(), B.sum()
    g = np.zeros(x.size)
    if sa >= sb:
        g[:-1] += 2.0 * a
        g[1:] += 2.0 * (b - 1.0) + 1.0
        return float(sa), g
    g[:-1] -= 2.0 * a
    g[1:] += -2.0 * (b - 1.0) + 1.0
    return float(sb), g


def _f4_margin(x):
    _, _, A, B = _f45_branches(x)
    return abs(float(A.sum() - B.sum()))


def f5(x):
    a, b, A, B = _f45_branches(x)
    pick = A >= B
    sgn = np.where(pick, 1.0, -1.0)
    g = np.zeros(x.size)
    g[:-1] += sgn * 2.0 * a
    g[1:] += sgn * 2.0 * (b - 1.0) + 1.0
    return float(np.where(pick, A, B).sum()), g


def _f5_margin(x):
    _, _, A, B = _f45_branches(x)
    return float(np.min(np.abs(A - B)))


# -- Ferrier polynomials ---------------------------------------------------


def _ferrier_h(x):
    i = np.arange(1, x.size + 1, dtype=float)
    h = i * x * x - 2.0 * x + x.sum()
    dh_diag = 2.0 * i * x - 2.0  # d h_i / d x_i minus the shared 1
    return h, dh_diag


def _abs_sum(x):
    h, dd = _ferrier_h(x)
    sg = np.sign(h)
    return float(np.abs(h).sum()), sg.sum() + sg * dd


def f6(x):
    return _abs_sum(x)


def f7(x):
    h, dd = _ferrier_h(x)
    return float(h @ h), 2.0 * h.sum() + 2.0 * h * dd


def f8(x):
    h, dd = _ferrier_h(x)
    ah = np.abs(h)
    j = int(np.argmax(ah))
    sg = np.sign(h[j])
    g = np.full(x.size, sg)
    g[j] += sg * dd[j]
    return float(ah[j]), g


def f9(x):
    v, g = _abs_sum(x)
    return v + 0.5 * float(x @ x), g + x


def f10(x):
    v, g = _abs_sum(x)
    nrm = float(np.linalg.norm(x))
    if nrm > 0.0:
        g = g + x / (2.0 * nrm)
    return v + 0.5 * nrm, g


def f10_l1(x):
    """Variant of f10 with the componentwise reading ``1/2 sum |x_i|``."""
    v, g = _abs_sum(x)
    return v + 0.5 * float(np.abs(x).sum()), g + 0.5 * np.sign(x)


def _ferrier_margin(x):
    h, _ = _ferrier_h(x)
    return float(np.min(np.abs(h)))


def _f8_margin(x):
    h, _ = _ferrier_h(x)
    ah = np.abs(h)
    return min(_two_largest_gap(ah), float(np.min(ah)))


def _f10_margin(x):
    return min(_ferrier_margin(x), float(np.linalg.norm(x)))


def _f10_l1_margin(x):
    return min(_ferrier_margin(x), float(np.min(np.abs(x))))


def _smooth_margin(x):
    return np.inf


_TABLE = {
    "f1": (f1, _f1_margin, lambda n: np.ones(n)),
    "f2": (f2, _f2_margin, lambda n: _alternating(n, -1.0, 1.0)),
    "f3": (f3, _f3_margin, lambda n: -np.ones(n)),
    "f4": (f4, _f4_margin, lambda n: _alternating(n, -1.5, 2.0)),
    "f5": (f5, _f5_margin, lambda n: _alternating(n, -1.5, 2.0)),
    "f6": (f6, _ferrier_margin, None),
    "f7": (f7, _smooth_margin, None),
    "f8": (f8, _f8_margin, None),
    "f9": (f9, _ferrier_margin, None),
    "f10": (f10, _f10_margin, None),
}


def _ferrier_start(n):
    return 1.0 / np.arange(1, n + 1, dtype=float) ** 2


@dataclass
class ProblemInstance:
    id: str
    n: int
    x_start: np.ndarray
    f_best: Optional[float]
    x_star: Optional[np.ndarray]
    oracle: Callable = field(repr=False)
    kink_margin: Callable = field(repr=False)

    def __call__(self, x):
        return self.oracle(np.asarray(x, dtype=float))

    def value(self, x):
        return self.oracle(np.asarray(x, dtype=float))[0]


def instantiate(pid, n, f10_norm="euclidean") -> ProblemInstance:
    """Return the problem ``pid`` in dimension ``n`` with its exact oracle.

    ``f10_norm`` selects the reading of the last term of f10: ``"euclidean"``
    (``|x|_2 / 2``, default) or ``"l1"`` (``sum |x_i| / 2``).
    """
    if pid not in _TABLE:
        raise KeyError(f"unknown problem {pid!r}; expected one of {PROBLEM_IDS}")
    n = int(n)
    if n < 2:
        raise ValueError("problems need n >= 2")
    fun, margin, start = _TABLE[pid]
    if pid == "f10" and f10_norm == "l1":
        fun, margin = f10_l1, _f10_l1_margin
    elif pid == "f10" and f10_norm != "euclidean":
        raise ValueError(f"unknown f10 reading {f10_norm!r}")
    x_start = (start or _ferrier_start)(n)
    if pid == "f3":
        f_best = F3_BEST.get(n)
        x_star = None  # computed by a noiseless run when needed
    else:
        f_best = 0.0
        x_star = np.zeros(n)
    return ProblemInstance(pid, n, x_start, f_best, x_star, fun, margin)


def central_difference(fun, x, h_rel=1e-6):
    g = np.empty(x.size)
    for i in range(x.size):
        h = h_rel * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fun(xp)[0] - fun(xm)[0]) / (2.0 * h)
    return g


def subgradient_check(pid, n, trials=100, seed=0, margin=1e-3, scale=2.0):
    """Max relative deviation between oracle subgradients and central differences.

    Points are drawn uniformly from ``[-scale, scale]^n``; points closer than
    ``margin`` (in the problem's kink measure) to a nonsmooth set are skipped.
    Deviation is ``|g - g_fd|_inf / max(1, |g|_inf)``.
    """
    prob = instantiate(pid, n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = 0
    attempts = 0
    while checked < trials and attempts < 1000 * trials:
        attempts += 1
        x = rng.uniform(-scale, scale, n)
        if not prob.kink_margin(x) > margin:
            continue
        _, g = prob.oracle(x)
        g_fd = central_difference(prob.oracle, x)
        dev = float(np.max(np.abs(g - g_fd)) / max(1.0, np.max(np.abs(g))))
        worst = max(worst, dev)
        checked += 1
    return worst
