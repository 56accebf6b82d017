"""Inexact limited memory bundle method.

The iteration follows the classical serious/null step structure:

* direction ``d = -D xi_tilde`` with L-BFGS after a serious step and L-SR1
  after a null step, corrected by ``-rho xi_tilde`` when the angle is poor;
* stop when ``w = -xi_tilde.d + 2 beta_tilde < max(eps, q_bar)``;
* no line search: one trial point per iteration, accepted when
  ``f_new - f_hat <= -eps_L t w``;
* at null steps a tilted subgradient and modified locality measure are
  aggregated with the serious-step subgradient and the previous aggregate.
"""

from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .aggregation import AggregateState, aggregate, build_qp, solve_simplex_qp
from .bundle import BundleElement, make_bundle_element
from .lmqn import BFGS, SR1, CorrectionStore
from .oracle import OracleError, evaluate

log = logging.getLogger(__name__)

TERMINATIONS = ("tolerance", "max_evals", "stagnation", "error")
STEPSIZE_RULES = ("unit", "interpolated")
SERIOUS_PAIR_RULES = ("gate", "curvature")


@dataclass
class SolverConfig:
    eps: float = 1e-5
    eps_L: float = 0.01
    gamma: float = 0.5
    t_min: float = 1e-12
    C_dir: float = 1e20
    rho: float = 1e-12
    q_bar: float = 0.0
    max_evals: int = 10000
    bundle_capacity: Optional[int] = None  # min(n + 3, 100) when None
    stepsize_rule: str = "interpolated"
    stepsize_memory: int = 3
    serious_pair_rule: str = "gate"
    stagnation_window: int = 50
    stagnation_tol: float = 1e-12
    pairs_initial: int = 7
    pairs_max: int = 15
    eta_max: float = 1e12
    check_invariants: bool = True
    strict: bool = False
    trace: bool = False

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0 < self.eps_L < 0.5:
            raise ValueError("eps_L must lie in (0, 1/2)")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.t_min <= 1:
            raise ValueError("t_min must lie in (0, 1]")
        if not self.C_dir > 0:
            raise ValueError("C_dir must be positive")
        if not 0 < self.rho < 0.5:
            raise ValueError("rho must lie in (0, 1/2)")
        if self.q_bar < 0:
            raise ValueError("q_bar must be nonnegative")
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        if self.stepsize_rule not in STEPSIZE_RULES:
            raise ValueError(f"stepsize_rule must be one of {STEPSIZE_RULES}")
        if self.serious_pair_rule not in SERIOUS_PAIR_RULES:
            raise ValueError(f"serious_pair_rule must be one of {SERIOUS_PAIR_RULES}")
        if self.pairs_initial < 3:
            raise ValueError("pairs_initial must be at least 3")

    def capacity_for(self, n):
        if self.bundle_capacity is not None:
            return int(self.bundle_capacity)
        return min(n + 3, 100)


@dataclass
class SolveReport:
    x_final: np.ndarray
    f_final: float
    w_final: float
    evaluations: int
    serious_steps: int
    null_steps: int
    termination: str
    message: str = ""
    trace: list = field(default_factory=list)
    violations: Counter = field(default_factory=Counter)
    checks: Counter = field(default_factory=Counter)

    @property
    def iterations(self):
        return self.serious_steps + self.null_steps


class InvariantViolation(AssertionError):
    pass


class _Monitor:
    """Counts checked and violated runtime invariants."""

    def __init__(self, enabled, strict):
        self.enabled = enabled
        self.strict = strict
        self.checks = Counter()
        self.violations = Counter()
        self.details: list[str] = []

    def check(self, name, ok, detail=""):
        self.checks[name] += 1
        if not ok:
            self.violations[name] += 1
            if len(self.details) < 20:
                self.details.append(f"{name}: {detail}")
            log.debug("invariant %s violated: %s", name, detail)
            if self.strict:
                raise InvariantViolation(f"{name}: {detail}")


def stopping_value(xi_tilde, d, beta_tilde):
    return float(-np.dot(xi_tilde, d) + 2.0 * beta_tilde)


def descent_test(f_new, f_hat, t, w, eps_L):
    """``"serious"`` when ``f_new - f_hat <= -eps_L t w``, else ``"null"``."""
    return "serious" if f_new - f_hat <= -eps_L * t * w else "null"


def quadratic_fit_stepsize(f0, slope, tau, value, t_min):
    """Minimizer of the parabola through ``(0, f0)`` with ``slope`` and ``(tau, value)``.

    Clamped to ``[t_min, 1]``; returns 1 when the data give no convex fit.
    """
    if not (tau > 0 and slope < 0):
        return 1.0
    curv = (value - f0 - slope * tau) / (tau * tau)
    if not curv > 0:
        return 1.0
    return float(min(max(-slope / (2.0 * curv), t_min), 1.0))


def interpolated_stepsize(x, f_hat, d, slope, elements, t_min, memory=3, noise=0.0):
    """Stepsize from the most recent trial points since the last serious step.

    Each of the last ``memory`` trial values is placed at the projection of
    its trial point onto the ray ``x + tau d`` and a parabola is fitted through
    ``(0, f_hat)`` with ``slope``. The largest of the fitted steps is returned,
    so one badly curved fit cannot shrink the step on its own.

    With function values perturbed by at most ``noise``, two values can differ
    by ``2 noise`` for no reason at all; fits whose rise above the tangent line
    stays within that band carry no curvature information and are ignored.
    """
    if not elements:
        return 1.0
    dd = float(d @ d)
    if not dd > 0:
        return 1.0
    t = None
    for e in list(elements)[-memory:]:
        tau = float((e.y - x) @ d) / dd
        if not tau > 0 or not e.f_y - f_hat - slope * tau > 2.0 * noise:
            continue
        cand = quadratic_fit_stepsize(f_hat, slope, tau, e.f_y, t_min)
        t = cand if t is None else max(t, cand)
    return 1.0 if t is None else t


def _tol(*scales):
    return 1e-10 * (1.0 + sum(abs(s) for s in scales))


def minimize(oracle: Callable, x1, config: Optional[SolverConfig] = None,
             callback: Optional[Callable] = None) -> SolveReport:
    """Minimize a locally Lipschitz function given a (possibly noisy) oracle.

    Parameters
    ----------
    oracle : callable
        ``y -> (f, xi)``; value and one subgradient, possibly perturbed.
    x1 : array_like
        Starting point.
    config : SolverConfig, optional
    callback : callable, optional
        Called with a per-iteration record dict.

    Returns
    -------
    SolveReport
    """
    cfg = config or SolverConfig()
    x = np.array(x1, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise ValueError("x1 must be a finite 1-D vector")
    n = x.size
    mon = _Monitor(cfg.check_invariants, cfg.strict)
    tol_stop = max(cfg.eps, cfg.q_bar)
    trace: list = []

    def report(termination, w, message=""):
        if message:
            log.info("terminating (%s): %s", termination, message)
        return SolveReport(x.copy(), f_hat, float(w), evals, n_serious, n_null,
                           termination, message, trace, mon.violations, mon.checks)

    evals = n_serious = n_null = 0
    f_hat = np.nan
    try:
        f_hat, xi = evaluate(oracle, x)
    except OracleError as exc:
        return report("error", np.nan, str(exc))
    evals = 1
    xi_m = xi.copy()
    agg = AggregateState(xi.copy(), 0.0)
    store = CorrectionStore(n, cfg.pairs_initial, cfg.pairs_max)
    recent: deque[BundleElement] = deque(maxlen=max(cfg.capacity_for(n), 1))
    after_serious = True
    i_cn = False
    stag_ref = None
    stag_count = 0
    w = np.inf

    while True:
        xi_t, beta_t = agg.xi_tilde, agg.beta_tilde
        mode = BFGS if after_serious else SR1

        # direction
        d = -store.apply(mode, xi_t)
        if not np.all(np.isfinite(d)):
            return report("error", w, "non-finite search direction")

        # correction
        xx = float(xi_t @ xi_t)
        corrected = bool(-float(xi_t @ d) < cfg.rho * xx or i_cn)
        if corrected:
            d = d - cfg.rho * xi_t
            if not after_serious:
                i_cn = True

        # stopping criterion
        xtd = -float(xi_t @ d)
        w = xtd + 2.0 * beta_t
        if mon.enabled:
            scale = float(np.linalg.norm(xi_t) * np.linalg.norm(d))
            mon.check("w_ge_2beta", w >= 2.0 * beta_t - _tol(w, scale),
                      f"w={w:.3e} beta={beta_t:.3e}")
            mon.check("w_ge_rho_xi2", w >= cfg.rho * xx - _tol(scale) * 1e-2,
                      f"w={w:.3e} rho|xi|^2={cfg.rho * xx:.3e}")
        if w < tol_stop:
            return report("tolerance", w)
        if evals >= cfg.max_evals:
            return report("max_evals", w)
        gnorm = float(np.sqrt(xx))
        if stag_ref is not None and abs(f_hat - stag_ref[0]) < cfg.stagnation_tol * (1 + abs(f_hat)) \
                and abs(gnorm - stag_ref[1]) < cfg.stagnation_tol * (1 + abs(f_hat)):
            stag_count += 1
            if stag_count >= cfg.stagnation_window:
                return report("stagnation", w, f"no progress in {stag_count} iterations")
        else:
            stag_ref = (f_hat, gnorm)
            stag_count = 0

        # auxiliary point
        if cfg.stepsize_rule == "unit" or after_serious:
            t = 1.0
        else:
            t = interpolated_stepsize(x, f_hat, d, -xtd, recent, cfg.t_min, cfg.stepsize_memory,
                                      cfg.q_bar)
        dn = float(np.linalg.norm(d))
        if dn > cfg.C_dir:
            d = d * (cfg.C_dir / dn)
        y = x + t * d
        try:
            f_new, xi_new = evaluate(oracle, y)
        except OracleError as exc:
            return report("error", w, str(exc))
        evals += 1
        s = y - x

        if mon.enabled:
            D_hat = (lambda v, _m=mode, _c=corrected: store.apply(_m, v) + (cfg.rho * v if _c else 0.0))
        kind = descent_test(f_new, f_hat, t, w, cfg.eps_L)
        if kind == "serious":
            u = xi_new - xi_m
            if cfg.serious_pair_rule == "curvature":
                store.try_push_curvature_pair(s, u)
            else:
                _push(store, s, u, d, xi_t, mon, D_hat if mon.enabled else None)
            store.grow()
            if mon.enabled:
                mon.check("fhat_nonincreasing", f_new <= f_hat, f"{f_new} > {f_hat}")
            x = y
            f_hat = f_new
            xi_m = xi_new.copy()
            agg = AggregateState(xi_new.copy(), 0.0)
            i_cn = False
            after_serious = True
            recent.clear()
            n_serious += 1
        else:
            elem = make_bundle_element(x, y, xi_new, f_new, f_hat, cfg.gamma)
            if mon.enabled:
                ss = float(s @ s)
                mon.check("beta_lower_bound", elem.beta >= 0.5 * cfg.gamma * ss - 1e-12 * (1 + abs(elem.beta)),
                          f"beta={elem.beta:.3e} bound={0.5 * cfg.gamma * ss:.3e}")
                lhs = -elem.beta + float(s @ elem.xi_mod)
                mon.check("null_step_model", lhs >= f_new - f_hat - _tol(f_hat, f_new),
                          f"lhs={lhs:.6e} rhs={f_new - f_hat:.6e}")
                mon.check("null_step_no_descent", f_new - f_hat > -cfg.eps_L * t * w, "")
            if elem.eta > cfg.eta_max:
                return report("error", w, f"convexification parameter exploded (eta={elem.eta:.3e})")
            u = elem.xi_mod - xi_m
            qp = build_qp(store, mode, corrected, cfg.rho, xi_m, elem.xi_mod, xi_t, elem.beta, beta_t)
            if not (np.all(np.isfinite(qp.G)) and np.all(np.isfinite(qp.b))):
                return report("error", w, "aggregation data overflowed")
            lam = solve_simplex_qp(qp)
            if mon.enabled:
                phi_star, phi_old = qp.phi(lam), qp.phi((0.0, 0.0, 1.0))
                mon.check("aggregation_monotone", phi_star <= phi_old + _tol(phi_old),
                          f"phi*={phi_star:.6e} phi(0,0,1)={phi_old:.6e}")
            agg = aggregate(lam, xi_m, elem.xi_mod, xi_t, elem.beta, beta_t)
            if mon.enabled:
                mon.check("beta_tilde_nonneg", agg.beta_tilde >= 0.0, f"{agg.beta_tilde:.3e}")
            _push(store, s, u, d, xi_t, mon, D_hat if mon.enabled else None)
            recent.append(elem)
            after_serious = False
            n_null += 1

        if cfg.trace or callback is not None:
            rec = {"k": n_serious + n_null, "evals": evals, "kind": kind, "t": t,
                   "w": w, "f_hat": f_hat, "corrected": corrected, "pairs": len(store)}
            if cfg.trace:
                trace.append(rec)
            if callback is not None:
                callback(rec)


def _push(store, s, u, d, xi_t, mon, D_hat):
    gate = -float(d @ u) - float(xi_t @ s)
    if D_hat is not None and gate < 0:
        Du = D_hat(u)
        val = float(u @ (Du - s))
        mon.check("sr1_curvature", val > -_tol(float(u @ Du), float(u @ s)),
                  f"u(Du-s)={val:.3e}")
    return store.try_push_pair(s, u, d, xi_t)
