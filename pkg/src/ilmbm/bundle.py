"""Bundle elements built from inexact oracle information.

A bundle element stores the trial point, a tilted ("modified") subgradient and
a modified locality measure that is guaranteed to be nonnegative even when the
linearization error is negative because of noise or nonconvexity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# below this squared distance the trial point is treated as the basic point
_COINCIDE_SQ = 1e-300


@dataclass(frozen=True)
class BundleElement:
    y: np.ndarray
    xi_mod: np.ndarray
    beta: float
    f_y: float
    eta: float = 0.0


@dataclass(frozen=True)
class LinearizationData:
    alpha: float
    eta: float
    gamma: float


def _check_dims(*vectors):
    n = vectors[0].shape
    for v in vectors[1:]:
        if v.shape != n:
            raise ValueError(f"dimension mismatch: {n} vs {v.shape}")


def linearization_error(f_hat, f_y, xi_y, x, y):
    """Return ``f_hat - f_y - xi_y @ (x - y)``; may be negative."""
    xi_y, x, y = (np.asarray(v, dtype=float) for v in (xi_y, x, y))
    _check_dims(xi_y, x, y)
    return float(f_hat - f_y - xi_y @ (x - y))


def convexification_parameter(alpha, x, y, gamma):
    """Downshift weight keeping the modified locality measure nonnegative.

    Returns ``gamma`` when ``x == y`` or ``alpha >= 0`` and
    ``-2 alpha / |y - x|^2 + gamma`` otherwise.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _check_dims(x, y)
    diff = y - x
    dist_sq = float(diff @ diff)
    if dist_sq < _COINCIDE_SQ:
        return float(gamma)
    return max(-2.0 * alpha / dist_sq, 0.0) + gamma


def linearization_data(f_hat, f_y, xi_y, x, y, gamma) -> LinearizationData:
    alpha = linearization_error(f_hat, f_y, xi_y, x, y)
    return LinearizationData(alpha, convexification_parameter(alpha, x, y, gamma), gamma)


def make_bundle_element(x, y, xi_y, f_y, f_hat, gamma) -> BundleElement:
    """Build the triplet ``(y, xi_mod, beta)`` relative to the basic point ``x``.

    ``xi_mod = xi_y + eta (y - x)`` and ``beta = alpha + eta/2 |y - x|^2``.
    By construction ``beta >= gamma/2 |y - x|^2``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xi_y = np.asarray(xi_y, dtype=float)
    _check_dims(x, y, xi_y)
    diff = y - x
    dist_sq = float(diff @ diff)
    if dist_sq < _COINCIDE_SQ:
        return BundleElement(y, xi_y.copy(), 0.0, float(f_y), float(gamma))
    alpha = float(f_hat - f_y + xi_y @ diff)
    eta = convexification_parameter(alpha, x, y, gamma)
    xi_mod = xi_y + eta * diff
    beta = alpha + 0.5 * eta * dist_sq
    return BundleElement(y, xi_mod, float(beta), float(f_y), float(eta))
