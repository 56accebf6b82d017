"""Limited-memory variable metric matrices in compact form.

The store keeps the most recent correction pairs ``(s, u)`` and applies either
the L-BFGS or the L-SR1 inverse-Hessian approximation to vectors without
forming an ``n x n`` matrix. Both forms are cached as

    D = theta * I + W.T @ K @ W

with ``W`` a ``(2m x n)`` or ``(m x n)`` row stack and ``K`` a small middle
matrix, rebuilt lazily after each mutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

BFGS = "bfgs"
SR1 = "sr1"

_PIVOT_TOL = 1e-14
# D restricted to span(U - S) must keep eigenvalues above this
_SR1_PD_MARGIN = 1e-12


@dataclass
class _CompactForm:
    theta: float
    W: np.ndarray | None  # rows span the update subspace
    K: np.ndarray | None
    used: int  # number of newest pairs actually in use

    def apply(self, v):
        if self.W is None:
            return self.theta * v
        if v.ndim == 1:
            return self.theta * v + self.W.T @ (self.K @ (self.W @ v))
        # rows of v are separate vectors
        return self.theta * v + ((v @ self.W.T) @ self.K.T) @ self.W


class CorrectionStore:
    """Ring of correction pairs with incrementally maintained Gram data.

    Parameters
    ----------
    n : int
        Problem dimension.
    capacity : int
        Initial maximum number of stored pairs (at least 3).
    max_capacity : int
        Upper limit reached through :meth:`grow`.
    """

    def __init__(self, n, capacity=7, max_capacity=15):
        if capacity < 3:
            raise ValueError("capacity must be at least 3")
        self.n = int(n)
        self.capacity = int(capacity)
        self.max_capacity = max(int(max_capacity), self.capacity)
        self._S = np.zeros((0, self.n))  # rows are s vectors, oldest first
        self._U = np.zeros((0, self.n))
        # full inner-product tables, oldest pair first
        self._su = np.zeros((0, 0))  # _su[i, j] = s_i . u_j
        self._uu = np.zeros((0, 0))
        self._ss = np.zeros((0, 0))
        self.theta_bfgs = 1.0
        self._forms: dict[str, _CompactForm] = {}
        self.mutations = 0

    def __len__(self):
        return self._S.shape[0]

    @property
    def pairs(self):
        return list(zip(self._S.copy(), self._U.copy()))

    @property
    def gram_uu(self):
        return self._uu.copy()

    @property
    def R(self):
        return np.triu(self._su)

    @property
    def C(self):
        return np.diag(self._su).copy()

    def grow(self):
        """Raise capacity by one when full, up to ``max_capacity``."""
        if len(self) >= self.capacity and self.capacity < self.max_capacity:
            self.capacity += 1
            return True
        return False

    def clear(self):
        self._S = np.zeros((0, self.n))
        self._U = np.zeros((0, self.n))
        self._su = np.zeros((0, 0))
        self._uu = np.zeros((0, 0))
        self._ss = np.zeros((0, 0))
        self.theta_bfgs = 1.0
        self._invalidate()

    def _invalidate(self):
        self._forms.clear()
        self.mutations += 1

    def try_push_pair(self, s, u, d, xi_tilde):
        """Store ``(s, u)`` if ``-d.u - xi_tilde.s < 0``; return whether it was stored.

        Degenerate pairs (``u.u == 0`` or ``s.u <= 0``) are rejected as well.
        """
        s = np.array(s, dtype=float)
        u = np.array(u, dtype=float)
        gate = -float(np.dot(d, u)) - float(np.dot(xi_tilde, s))
        if not gate < 0.0:
            return False
        return self._push_checked(s, u)

    def try_push_curvature_pair(self, s, u):
        """Store ``(s, u)`` if ``s.u > 0``; the usual L-BFGS safeguard."""
        return self._push_checked(np.array(s, dtype=float), np.array(u, dtype=float))

    def _push_checked(self, s, u):
        uu = float(u @ u)
        su = float(s @ u)
        if uu == 0.0 or not su > 0.0 or not np.isfinite(uu + su):
            return False
        self._append(s, u)
        self.theta_bfgs = su / uu
        return True

    def _append(self, s, u):
        S, U = self._S, self._U
        if len(self) >= self.capacity:
            drop = len(self) - self.capacity + 1
            S, U = S[drop:], U[drop:]
            self._su = self._su[drop:, drop:]
            self._uu = self._uu[drop:, drop:]
            self._ss = self._ss[drop:, drop:]
        # s.u_j for the new row of _su, s_i.u for the new column
        self._su = _border(self._su, S @ u, U @ s, float(s @ u))
        uu_col = U @ u
        self._uu = _border(self._uu, uu_col, uu_col, float(u @ u))
        ss_col = S @ s
        self._ss = _border(self._ss, ss_col, ss_col, float(s @ s))
        self._S = np.vstack([S, s])
        self._U = np.vstack([U, u])
        self._invalidate()

    # -- compact forms -------------------------------------------------

    def form(self, mode):
        f = self._forms.get(mode)
        if f is None:
            if mode == BFGS:
                f = self._build_bfgs()
            elif mode == SR1:
                f = self._build_sr1()
            else:
                raise ValueError(f"unknown update mode {mode!r}")
            self._forms[mode] = f
        return f

    def _build_bfgs(self):
        m = len(self)
        if m == 0:
            return _CompactForm(1.0, None, None, 0)
        theta = self.theta_bfgs
        diag = np.diag(self._su)
        tol = _PIVOT_TOL * np.max(np.abs(diag))
        bad = np.flatnonzero(~(np.abs(diag) > tol))
        start = int(bad[-1]) + 1 if bad.size else 0
        if start >= m:
            return _CompactForm(theta, None, None, 0)
        k = m - start
        R = np.triu(self._su[start:, start:])
        Rinv = solve_triangular(R, np.eye(k), lower=False)
        C = np.diag(diag[start:])
        UU = self._uu[start:, start:]
        K = np.zeros((2 * k, 2 * k))
        K[:k, :k] = Rinv.T @ (C + theta * UU) @ Rinv
        K[:k, k:] = -Rinv.T
        K[k:, :k] = -Rinv
        W = np.vstack([self._S[start:], theta * self._U[start:]])
        return _CompactForm(theta, W, K, k)

    def _build_sr1(self):
        m = len(self)
        for start in range(m):
            su = self._su[start:, start:]
            R = np.triu(su)
            M = self._uu[start:, start:] - R - R.T + np.diag(np.diag(su))
            lam, Q = np.linalg.eigh(M)
            scale = np.max(np.abs(M).sum(axis=1))
            if not scale > 0 or np.min(np.abs(lam)) < _PIVOT_TOL * scale:
                continue
            Minv = (Q / lam) @ Q.T
            # D is positive definite iff I - L.T Minv L is, with L L.T the
            # Gram matrix of the rows of U - S
            G = self._uu[start:, start:] - su - su.T + self._ss[start:, start:]
            try:
                L = np.linalg.cholesky(G)
            except np.linalg.LinAlgError:
                gl, gq = np.linalg.eigh(G)
                L = gq * np.sqrt(np.clip(gl, 0.0, None))
            E = L.T @ Minv @ L
            if not np.linalg.eigvalsh(0.5 * (E + E.T))[-1] < 1.0 - _SR1_PD_MARGIN:
                continue
            V = self._U[start:] - self._S[start:]
            return _CompactForm(1.0, V, -Minv, m - start)
        return _CompactForm(1.0, None, None, 0)

    def apply(self, mode, v):
        """Return ``D v`` for ``mode`` in {"bfgs", "sr1"}; rows of a 2-D ``v`` are vectors."""
        return self.form(mode).apply(np.asarray(v, dtype=float))

    def pairs_in_use(self, mode):
        return self.form(mode).used


def _border(A, col, row, corner):
    """Append one row/column: ``out[:-1, -1] = col``, ``out[-1, :-1] = row``."""
    k = A.shape[0]
    out = np.empty((k + 1, k + 1))
    out[:k, :k] = A
    out[:k, k] = col
    out[k, :k] = row
    out[k, k] = corner
    return out


def apply_bfgs(store, v):
    return store.apply(BFGS, v)


def apply_sr1(store, v):
    return store.apply(SR1, v)


def try_push_pair(store, s, u, d, xi_tilde):
    return store.try_push_pair(s, u, d, xi_tilde)
