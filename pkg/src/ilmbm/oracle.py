"""First-order oracles and bounded-noise wrappers.

An oracle is any callable ``y -> (f, xi)`` returning a function value and one
(generalized) gradient in a single call. :class:`NoisyOracle` corrupts the
response according to one of five noise models:

==== ==========================================================
N0   exact
N1   constant bound on value and subgradient noise
N2   both bounds vanish near ``x_star`` (``|y-x*|/100``, ``|y-x*|^2/100``)
N3   exact value, constant subgradient noise
N4   exact value, vanishing subgradient noise
==== ==========================================================
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

NOISE_KINDS = ("N0", "N1", "N2", "N3", "N4")


class OracleResponse(NamedTuple):
    f: float
    xi: np.ndarray


class OracleError(RuntimeError):
    """Raised when an oracle cannot produce a finite response."""


def evaluate(oracle: Callable, y) -> OracleResponse:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise OracleError("query point is not finite")
    f, xi = oracle(y)
    xi = np.asarray(xi, dtype=float)
    if not np.isfinite(f) or not np.all(np.isfinite(xi)):
        raise OracleError(f"oracle returned a non-finite response at |y|={np.linalg.norm(y):.3g}")
    return OracleResponse(float(f), xi)


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "N0"
    q_bar: float = 0.0
    seed: int = 0
    x_star: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.q_bar < 0:
            raise ValueError("q_bar must be nonnegative")
        if self.kind in ("N2", "N4") and self.x_star is None:
            raise ValueError(f"{self.kind} needs x_star")

    def bounds(self, y):
        """Return ``(value_bound, subgradient_bound)`` at the query point."""
        q = self.q_bar
        if self.kind == "N0" or q == 0.0:
            return 0.0, 0.0
        if self.kind == "N1":
            return q, q
        if self.kind == "N3":
            return 0.0, q
        dist = float(np.linalg.norm(np.asarray(y) - self.x_star))
        bxi = min(q, dist * dist / 100.0)
        if self.kind == "N2":
            return min(q, dist / 100.0), bxi
        return 0.0, bxi


def uniform_in_ball(rng: np.random.Generator, n, radius):
    """Uniform sample from the closed ball of ``radius`` in R^n."""
    if radius <= 0.0:
        return np.zeros(n)
    g = rng.standard_normal(n)
    norm = np.linalg.norm(g)
    while norm == 0.0:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
    return (radius * rng.random() ** (1.0 / n) / norm) * g


def uniform_sampler(rng: np.random.Generator, n, b_f, b_xi):
    """Default noise law: ``q ~ U(-b_f, b_f)``, ``e`` uniform in a ball of radius ``U(0, b_xi)``."""
    q = rng.uniform(-b_f, b_f) if b_f > 0.0 else 0.0
    radius = rng.uniform(0.0, b_xi) if b_xi > 0.0 else 0.0
    return q, uniform_in_ball(rng, n, radius)


class NoisyOracle:
    """Wrap an exact oracle with seeded bounded noise.

    The perturbation of the ``k``-th call depends only on ``(seed, k)``. The
    value is shifted by ``-q`` and the subgradient by ``e``, both drawn by
    ``sampler(rng, n, b_f, b_xi)``; any replacement must keep ``|q| <= b_f``
    and ``|e| <= b_xi``. Not thread-safe.
    """

    def __init__(self, oracle, spec: NoiseSpec, record=False, sampler=uniform_sampler):
        self.oracle = oracle
        self.spec = spec
        self.sampler = sampler
        self.calls = 0
        self.record = record
        self.log: list[tuple[float, float, float, float]] = []  # (b_f, q, b_xi, |e|)

    def reset(self):
        self.calls = 0
        self.log.clear()

    def __call__(self, y):
        f, xi = self.oracle(y)
        k = self.calls
        self.calls += 1
        b_f, b_xi = self.spec.bounds(y)
        if b_f == 0.0 and b_xi == 0.0:
            if self.record:
                self.log.append((0.0, 0.0, 0.0, 0.0))
            return f, xi
        rng = np.random.default_rng([self.spec.seed, k])
        q, e = self.sampler(rng, len(xi), b_f, b_xi)
        if self.record:
            self.log.append((b_f, q, b_xi, float(np.linalg.norm(e))))
        return f - q, np.asarray(xi, dtype=float) + e


def wrap_noise(oracle, spec: NoiseSpec, record=False, sampler=uniform_sampler):
    """Return ``oracle`` itself for N0, otherwise a :class:`NoisyOracle`."""
    if spec.kind == "N0":
        return oracle
    return NoisyOracle(oracle, spec, record=record, sampler=sampler)
