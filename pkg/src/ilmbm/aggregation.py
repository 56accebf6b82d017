"""Three-vector subgradient aggregation over the unit simplex."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lmqn import CorrectionStore


@dataclass(frozen=True)
class AggregateState:
    xi_tilde: np.ndarray
    beta_tilde: float


@dataclass(frozen=True)
class SimplexQP:
    """``phi(lam) = lam @ G @ lam + 2 * b @ lam`` on the unit simplex."""

    G: np.ndarray
    b: np.ndarray

    def phi(self, lam):
        lam = np.asarray(lam, dtype=float)
        return float(lam @ self.G @ lam + 2.0 * self.b @ lam)


def build_qp(store: CorrectionStore, mode, correction, rho, xi_m, xi_mod, xi_tilde,
             beta_new, beta_tilde) -> SimplexQP:
    """Gram matrix of the three subgradients under ``D`` (plus ``rho I`` if corrected)."""
    V = np.vstack([xi_m, xi_mod, xi_tilde]).astype(float)
    # overflow shows up as non-finite entries, which the caller checks
    with np.errstate(over="ignore", invalid="ignore"):
        G = V @ store.apply(mode, V).T
        if correction:
            G = G + rho * (V @ V.T)
        G = 0.5 * (G + G.T)
    b = np.array([0.0, float(beta_new), float(beta_tilde)])
    return SimplexQP(G, b)


def _phi(G, b, lam):
    l1, l2, l3 = lam
    return (l1 * (l1 * G[0][0] + 2.0 * (l2 * G[0][1] + l3 * G[0][2]))
            + l2 * (l2 * G[1][1] + 2.0 * l3 * G[1][2]) + l3 * l3 * G[2][2]
            + 2.0 * (l1 * b[0] + l2 * b[1] + l3 * b[2]))


def _edge(G, b, i, j):
    """Stationary point on the line through vertices ``i`` and ``j``."""
    curv = G[i][i] - 2.0 * G[i][j] + G[j][j]
    if not curv > 1e-15 * (abs(G[i][i]) + abs(G[j][j])):
        return None  # linear along the edge, optimum sits at a vertex
    t = (G[j][j] - G[i][j] + b[j] - b[i]) / curv
    lam = [0.0, 0.0, 0.0]
    lam[i], lam[j] = t, 1.0 - t
    return lam


def _interior(G, b):
    """Stationary point on the plane ``sum(lam) = 1`` (min-norm when singular)."""
    # lam = e1 + l2 (e2 - e1) + l3 (e3 - e1)
    h22 = G[1][1] - 2.0 * G[0][1] + G[0][0]
    h33 = G[2][2] - 2.0 * G[0][2] + G[0][0]
    h23 = G[1][2] - G[0][1] - G[0][2] + G[0][0]
    r2 = -(G[0][1] - G[0][0] + b[1] - b[0])
    r3 = -(G[0][2] - G[0][0] + b[2] - b[0])
    det = h22 * h33 - h23 * h23
    if abs(det) > 1e-13 * (h22 * h33 + h23 * h23):
        l2 = (r2 * h33 - r3 * h23) / det
        l3 = (h22 * r3 - h23 * r2) / det
    else:
        H = np.array([[h22, h23], [h23, h33]])
        rhs = np.array([r2, r3])
        l2, l3 = np.linalg.lstsq(H, rhs, rcond=1e-13)[0]
        if not np.allclose(H @ (l2, l3), rhs, rtol=1e-9, atol=1e-12 * (1 + abs(rhs).max())):
            return None  # unbounded along the plane, optimum on the boundary
    return [1.0 - l2 - l3, float(l2), float(l3)]


def solve_simplex_qp(qp: SimplexQP, prefer=(2, 1), feas_tol=1e-12, tie_rtol=1e-13):
    """Exact minimizer of ``qp.phi`` over the simplex by enumerating KKT supports.

    The stationary point of each of the seven faces (three vertices, three
    edges, interior) is computed in closed form; infeasible ones are dropped
    and the best remaining candidate is returned. Near-ties are resolved in
    favour of larger weights at the indices in ``prefer``.
    """
    G = np.asarray(qp.G, dtype=float).tolist()
    b = [float(v) for v in qp.b]
    cands = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    cands += [_edge(G, b, 0, 1), _edge(G, b, 0, 2), _edge(G, b, 1, 2), _interior(G, b)]
    scored = []
    for lam in cands:
        if lam is None or min(lam) < -feas_tol:
            continue
        lam = [max(v, 0.0) for v in lam]
        tot = lam[0] + lam[1] + lam[2]
        if not math.isfinite(tot):
            continue
        lam = [v / tot for v in lam]
        scored.append((_phi(G, b, lam), lam))
    best = min(val for val, _ in scored)
    tol = tie_rtol * (1.0 + abs(best))
    close = [lam for val, lam in scored if val <= best + tol]
    return np.array(max(close, key=lambda lam: tuple(lam[i] for i in prefer)))


def aggregate(lam, xi_m, xi_mod, xi_tilde, beta_new, beta_tilde) -> AggregateState:
    """Convex combinations of the three subgradients and two locality measures."""
    l1, l2, l3 = (float(v) for v in lam)
    xi = l1 * np.asarray(xi_m) + l2 * np.asarray(xi_mod) + l3 * np.asarray(xi_tilde)
    beta = l2 * beta_new + l3 * beta_tilde
    return AggregateState(xi, beta)
