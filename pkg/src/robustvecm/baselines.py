"""Comparison estimators: projected gradient descent and swapped loss families.

``fit_gd`` minimizes the same penalized objective by alternating a projected
gradient step on (Pi, Gamma) with Sigma held fixed (Pi re-truncated to the
rank budget after each step) and a closed-form reweighted update of Sigma.
``fit_with_loss`` reuses the majorize-minimize pipeline unchanged with the
weight family switched, so only the loss assumption differs between runs.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError
from .model import VecmParams, factorize_pi, residuals
from .objective import mahalanobis_sq, penalized_objective, objective_gradients, weight_values
from .solver import (
    FitReport,
    SolverOptions,
    _floor_spd,
    _projected_products,
    _resolve_init,
    check_descent,
    fit,
    psi_bound,
    q_coefficients,
    rank_truncate,
    robust_weights,
    weighted_blocks,
)

#: Step sizes below this abort the backtracking line search.
MIN_STEP = 1e-18


@dataclass(frozen=True)
class GdOptions:
    """Options for the projected gradient baseline.

    ``step`` is 'backtracking' (halving with an Armijo-style sufficient
    decrease, factors ``beta`` and ``c``) or 'fixed' with step size ``eta``.
    """

    rank: int
    cfg: object
    step: str = "backtracking"
    eta: float = None
    beta: float = 0.5
    c: float = 1e-4
    max_iter: int = 5000
    rel_tol: float = 1e-8
    init: object = "warm_start"

    def __post_init__(self):
        if self.step not in ("backtracking", "fixed"):
            raise DimensionError(f"step must be 'backtracking' or 'fixed', got {self.step!r}")
        if self.step == "fixed" and not (self.eta is not None and self.eta > 0):
            raise DimensionError(f"fixed step needs eta > 0, got {self.eta}")
        if self.step == "backtracking" and not (0 < self.beta < 1 and 0 < self.c < 1):
            raise DimensionError(
                f"backtracking needs beta, c in (0, 1), got beta={self.beta}, c={self.c}"
            )
        if self.max_iter < 1:
            raise DimensionError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.rel_tol > 0:
            raise DimensionError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.rank < 0:
            raise DimensionError(f"rank must be >= 0, got {self.rank}")


def _initial_step(params, mf, cfg, rank):
    """Curvature-informed first step size: inverse of the quadratic bound."""
    w = robust_weights(params, mf, loss=cfg.loss, df=cfg.df)
    dyb, ylagb, dxb = weighted_blocks(mf, w)
    a_mat, _ = _projected_products(dyb, ylagb, dxb)
    q = q_coefficients(params.pi, cfg.rat)
    return 1.0 / psi_bound(a_mat, params.sigma, cfg.xi, q)


def _sigma_update(params, mf, cfg):
    """Closed-form reweighted residual scatter at the current (Pi, Gamma)."""
    resid = residuals(params, mf)
    delta = mahalanobis_sq(resid, params.sigma)
    w = weight_values(delta, params.k, cfg.loss, cfg.df)
    sigma = (resid * w) @ resid.T / mf.n
    return _floor_spd(0.5 * (sigma + sigma.T))


def fit_gd(mf, opts):
    """Projected gradient descent on the penalized objective.

    Per iteration: one gradient step on (Pi, Gamma) at fixed Sigma, Pi
    truncated back to rank <= r, then the reweighted closed-form Sigma
    update. Under backtracking the accepted step must decrease the
    objective, so the recorded trace is nonincreasing; with a fixed step no
    monotonicity is enforced.
    """
    if opts.rank >= mf.k:
        raise DimensionError(f"rank must be < K, got rank={opts.rank}, K={mf.k}")
    cfg = opts.cfg
    start = time.perf_counter()
    params = _resolve_init(mf, SolverOptions(rank=opts.rank, cfg=cfg, init=opts.init))
    trace = [penalized_objective(params, mf, cfg)]
    eta = opts.eta if opts.step == "fixed" else _initial_step(params, mf, cfg, opts.rank)
    terminated = "max_iter"
    iteration = 0

    for iteration in range(1, opts.max_iter + 1):
        grad_pi, grad_gamma = objective_gradients(params, mf, cfg)
        f_cur = trace[-1]
        if opts.step == "fixed":
            pi_new = rank_truncate(params.pi - eta * grad_pi, opts.rank)
            gamma_new = params.gamma - eta * grad_gamma
            params = VecmParams(
                k=params.k, p=params.p, r=opts.rank,
                pi=pi_new, gamma=gamma_new, sigma=params.sigma,
            )
        else:
            eta_try = 2.0 * eta
            while True:
                pi_new = rank_truncate(params.pi - eta_try * grad_pi, opts.rank)
                gamma_new = params.gamma - eta_try * grad_gamma
                trial = VecmParams(
                    k=params.k, p=params.p, r=opts.rank,
                    pi=pi_new, gamma=gamma_new, sigma=params.sigma,
                )
                f_try = penalized_objective(trial, mf, cfg)
                step_sq = (
                    float(np.sum((pi_new - params.pi) ** 2))
                    + float(np.sum((gamma_new - params.gamma) ** 2))
                )
                if f_try <= f_cur - opts.c * step_sq / eta_try:
                    params = trial
                    eta = eta_try
                    break
                eta_try *= opts.beta
                if eta_try < MIN_STEP:
                    raise NumericalError(
                        "backtracking step size underflowed without finding descent"
                    )
        sigma_new = _sigma_update(params, mf, cfg)
        params = VecmParams(
            k=params.k, p=params.p, r=opts.rank,
            pi=params.pi, gamma=params.gamma, sigma=sigma_new,
        )
        f_new = penalized_objective(params, mf, cfg)
        trace.append(f_new)
        if abs(f_cur - f_new) <= opts.rel_tol * max(1.0, abs(f_cur)):
            terminated = "converged"
            break

    if opts.step == "backtracking":
        check_descent(trace)
    factors = factorize_pi(params.pi, opts.rank)
    return FitReport(
        params=params,
        factors=factors,
        obj_trace=np.asarray(trace),
        iterations=iteration,
        terminated=terminated,
        wall_time=time.perf_counter() - start,
    )


def fit_with_loss(mf, opts):
    """Majorize-minimize fit with the weight family taken from opts.cfg.loss.

    Identical machinery for 'cauchy', 'student' (df from the config), and
    'gaussian' (unit weights); only the loss assumption changes, so reports
    are directly comparable across families.
    """
    if not isinstance(opts, SolverOptions):
        raise DimensionError("fit_with_loss expects SolverOptions")
    return fit(mf, opts)
