"""Random correction stores built the way the solver builds them."""

import numpy as np

from ilmbm.lmqn import CorrectionStore


def gated_store(rng, n, m, mode, max_tries=200, on_accept=None):
    """Fill a store with up to ``m`` pairs that pass the acceptance gate.

    Each candidate uses the direction ``d = -D xi`` of the current matrix, a
    step ``s = t d`` and a noisy curvature response ``u``. ``on_accept`` is
    called as ``on_accept(store, s, u)`` just before an accepted push.
    """
    store = CorrectionStore(n, capacity=max(m, 3), max_capacity=max(m, 3))
    tries = 0
    while len(store) < m and tries < max_tries:
        tries += 1
        xi = rng.standard_normal(n)
        d = -store.apply(mode, xi)
        s = rng.uniform(0.1, 1.0) * d
        A = rng.standard_normal((n, n))
        H = A @ A.T / n + 0.1 * np.eye(n)
        u = H @ s + 0.3 * rng.standard_normal(n) * np.linalg.norm(s)
        if on_accept is not None and -(d @ u) - (xi @ s) < 0:
            on_accept(store, s, u)
        store.try_push_pair(s, u, d, xi)
    return store
