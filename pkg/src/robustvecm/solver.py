"""Majorize-minimize solver for rank-constrained sparse robust estimation.

Each iteration rebuilds a weighted least-squares model tangent to the robust
loss at the current iterate, eliminates (Gamma, Sigma) in closed form,
majorizes the remaining objective in Pi by an isotropic quadratic, and solves
the resulting nearest-rank-r problem by truncated SVD:

  1. weights  w_t from the current squared Mahalanobis distances;
  2. weighted blocks  dYb = dY diag(sqrt(w)), similarly Ylagb, dXb;
  3. annihilator of the short-run regressors
       M = I - dXb' (dXb dXb')^{-1} dXb  (applied implicitly, never formed);
  4. quadratic model in vec(Pi) with curvature operator
       G: Pi -> Sigma^{-1} Pi A + xi Pi diag(q),  A = Ylagb M Ylagb',
     linear term H = Sigma^{-1} dYb M Ylagb', and penalty curvatures q from
     the smoothed rational function at the current column norms;
  5. scalar bound psi >= lambda_max(G) turns the model into
       (psi/2) ||Pi - P||_F^2, a gradient step P of size 1/psi;
  6. Pi update = best rank-r approximation of P (truncated SVD), then Gamma
     and Sigma from their weighted closed forms given the new Pi.

The construction guarantees a monotonically nonincreasing objective trace.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import CollinearRegressorsError, DimensionError, NumericalError
from .model import MatrixForm, VecmParams, factorize_pi
from .objective import (
    ObjectiveConfig,
    penalized_objective,
    rat_curvature,
    robust_weights,
)

#: Sigma is floored so its smallest eigenvalue is at least this value.
SIGMA_FLOOR = 1e-10

#: Per-step relative slack allowed in the descent check of the trace.
DESCENT_SLACK = 1e-9


@dataclass(frozen=True)
class SolverOptions:
    """Options for the majorize-minimize fit.

    ``init`` is 'warm_start' (one unweighted least-squares pass, Pi rank
    truncated), 'zero_pi', or an explicit VecmParams to start from.
    """

    rank: int
    cfg: ObjectiveConfig
    max_iter: int = 2000
    rel_tol: float = 1e-8
    init: object = "warm_start"

    def __post_init__(self):
        if self.max_iter < 1:
            raise DimensionError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.rel_tol > 0:
            raise DimensionError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.rank < 0:
            raise DimensionError(f"rank must be >= 0, got {self.rank}")
        if not (isinstance(self.init, (str, VecmParams))):
            raise DimensionError("init must be 'warm_start', 'zero_pi', or VecmParams")
        if isinstance(self.init, str) and self.init not in ("warm_start", "zero_pi"):
            raise DimensionError(f"unknown init {self.init!r}")


@dataclass
class SolverState:
    """Mutable per-iteration state exposed to observers during a fit."""

    params: VecmParams
    weights: np.ndarray = None
    qvec: np.ndarray = None
    psi: float = None
    obj_trace: list = field(default_factory=list)
    iteration: int = 0


@dataclass(frozen=True)
class FitReport:
    """Final estimates plus the convergence record of one solver run."""

    params: VecmParams
    factors: object
    obj_trace: np.ndarray
    iterations: int
    terminated: str
    wall_time: float

    def __post_init__(self):
        trace = np.asarray(self.obj_trace, dtype=float)
        trace.setflags(write=False)
        object.__setattr__(self, "obj_trace", trace)


def weighted_blocks(mf, w):
    """Right-multiply each regression block by diag(sqrt(w)).

    Weights must be strictly positive; a nonpositive weight indicates a
    broken internal invariant of the caller.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (mf.n,):
        raise DimensionError(f"weights must have shape ({mf.n},), got {w.shape}")
    if not np.all(w > 0):
        raise NumericalError("robust weights must be strictly positive")
    root = np.sqrt(w)
    return mf.dy * root, mf.ylag * root, mf.dx * root


def _gram_cholesky(dxbar):
    gram = dxbar @ dxbar.T
    try:
        return cho_factor(gram, lower=True)
    except LinAlgError:
        rank = np.linalg.matrix_rank(gram)
        raise CollinearRegressorsError(
            f"short-run regressor Gram matrix is singular: rank {rank} < {gram.shape[0]} "
            "(collinear lagged-difference/drift rows)"
        ) from None


def projection_matrix(dxbar):
    """Dense annihilator M = I - dXb' (dXb dXb')^{-1} dXb.

    Symmetric and idempotent with M dXb' = 0. Intended for small problems
    and tests; the solver applies the projection implicitly.
    """
    dxbar = np.asarray(dxbar, dtype=float)
    cf = _gram_cholesky(dxbar)
    n = dxbar.shape[1]
    return np.eye(n) - dxbar.T @ cho_solve(cf, dxbar)


def _projected_products(dybar, ylagbar, dxbar):
    """A = Ylagb M Ylagb' and C = dYb M Ylagb' without forming M."""
    cf = _gram_cholesky(dxbar)
    cy = ylagbar @ dxbar.T
    cd = dybar @ dxbar.T
    gram_inv_cy = cho_solve(cf, cy.T)
    a_mat = ylagbar @ ylagbar.T - cy @ gram_inv_cy
    a_mat = 0.5 * (a_mat + a_mat.T)
    cross = dybar @ ylagbar.T - cd @ gram_inv_cy
    return a_mat, cross


def closed_form_gamma_sigma(pi, dybar, ylagbar, dxbar):
    """Minimizers of the weighted Gaussian model over (Gamma, Sigma) given Pi.

    Gamma = (dYb - Pi Ylagb) dXb' (dXb dXb')^{-1} and Sigma is the projected
    residual scatter divided by N, floored to stay positive definite.
    """
    cf = _gram_cholesky(dxbar)
    n = dybar.shape[1]
    resid_lr = dybar - pi @ ylagbar
    gamma = cho_solve(cf, (resid_lr @ dxbar.T).T).T
    resid = resid_lr - gamma @ dxbar  # equals resid_lr @ M
    sigma = resid @ resid.T / n
    sigma = 0.5 * (sigma + sigma.T)
    return gamma, _floor_spd(sigma)


def _floor_spd(sigma):
    """Shift the spectrum up so the smallest eigenvalue is >= SIGMA_FLOOR."""
    lam_min = np.linalg.eigvalsh(sigma)[0]
    bump = max(0.0, SIGMA_FLOOR - lam_min)
    if bump > 0.0:
        sigma = sigma + bump * np.eye(sigma.shape[0])
    return sigma


def q_coefficients(pi, rp):
    """Penalty majorizer curvatures at the current column norms of Pi.

    q_i = scale / (m_i (scale + m_i)^2) with m_i = max(eps, ||pi_i||_2);
    strictly positive and clamped below the smoothing width.
    """
    norms = np.linalg.norm(np.asarray(pi, dtype=float), axis=0)
    return rat_curvature(norms, rp)


def surrogate_quadratic(a_mat, sigma, xi, q, cross):
    """Quadratic model pieces for the Pi subproblem.

    Returns ``(apply_g, h)`` where ``apply_g(Pi) = Sigma^{-1} Pi A +
    xi Pi diag(q)`` realizes the curvature operator on matrices (the
    K^2 x K^2 Kronecker form is never materialized) and ``h`` is the dense
    linear-term matrix Sigma^{-1} (dYb M Ylagb').
    """
    try:
        cf = cho_factor(sigma, lower=True)
    except LinAlgError as exc:
        raise NumericalError(f"scatter matrix is not positive definite: {exc}") from exc
    h = cho_solve(cf, cross)

    def apply_g(pi):
        out = cho_solve(cf, pi @ a_mat)
        if xi > 0:
            out = out + xi * pi * q
        return out

    return apply_g, h


def psi_bound(a_mat, sigma, xi, q):
    """Cheap upper bound on the largest eigenvalue of the curvature operator.

    lambda_max(A (x) Sigma^{-1}) = lambda_max(A) / lambda_min(Sigma) for the
    Kronecker product of positive semidefinite factors, and the diagonal
    penalty block adds at most xi max_i q_i.
    """
    lam_a = float(np.linalg.eigvalsh(a_mat)[-1])
    lam_sigma_min = float(np.linalg.eigvalsh(sigma)[0])
    if lam_sigma_min <= 0:
        raise NumericalError("scatter matrix is not positive definite")
    psi = lam_a / lam_sigma_min
    if xi > 0:
        psi += xi * float(np.max(q))
    if not psi > 0:
        raise NumericalError("curvature bound is not positive (degenerate regressors)")
    return psi


def proximal_target(pi, a_mat, sigma, xi, q, h, psi):
    """Gradient step of size 1/psi on the quadratic model at Pi.

    P = Pi - (Sigma^{-1} Pi A + xi Pi diag(q) - H) / psi; rank-truncating P
    solves the isotropic majorized subproblem exactly.
    """
    apply_g, _ = surrogate_quadratic(a_mat, sigma, xi, q, np.zeros_like(h))
    return pi - (apply_g(pi) - h) / psi


def rank_truncate(mat, r):
    """Best Frobenius approximation of rank <= r via truncated SVD.

    Ties at the cut (sigma_r = sigma_{r+1}) keep the first r singular
    triplets in the SVD's descending order.
    """
    mat = np.asarray(mat, dtype=float)
    r = int(r)
    if r >= min(mat.shape):
        return mat.copy()
    if r <= 0:
        return np.zeros_like(mat)
    try:
        u, s, vt = np.linalg.svd(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed during rank truncation: {exc}") from exc
    return (u[:, :r] * s[:r]) @ vt[:r]


def _lag_order(mf):
    extra = mf.dx.shape[0] - 1
    if extra % mf.k != 0:
        raise DimensionError(
            f"dX has {mf.dx.shape[0]} rows, which does not match any lag order for K={mf.k}"
        )
    return extra // mf.k + 1


def warm_start_params(mf, rank):
    """One unweighted pass: joint least squares, truncate Pi, refit the rest.

    Regresses dY on the stacked [Ylag; dX], truncates the Pi block to the
    rank budget, then takes the closed-form (Gamma, Sigma) given that Pi.
    Deterministic, and feasible for the rank constraint by construction.
    """
    k = mf.k
    z = np.vstack([mf.ylag, mf.dx])
    theta, *_ = np.linalg.lstsq(z.T, mf.dy.T, rcond=None)
    pi0 = rank_truncate(theta.T[:, :k], rank)
    gamma0, sigma0 = closed_form_gamma_sigma(pi0, mf.dy, mf.ylag, mf.dx)
    return VecmParams(k=k, p=_lag_order(mf), r=rank, pi=pi0, gamma=gamma0, sigma=sigma0)


def zero_pi_params(mf, rank):
    """Start with Pi = 0 and the matching closed-form (Gamma, Sigma)."""
    pi0 = np.zeros((mf.k, mf.k))
    gamma0, sigma0 = closed_form_gamma_sigma(pi0, mf.dy, mf.ylag, mf.dx)
    return VecmParams(k=mf.k, p=_lag_order(mf), r=rank, pi=pi0, gamma=gamma0, sigma=sigma0)


def _resolve_init(mf, opts):
    if isinstance(opts.init, VecmParams):
        if opts.init.k != mf.k or opts.init.gamma.shape[1] != mf.dx.shape[0]:
            raise DimensionError("provided initial parameters do not match the data")
        return opts.init
    if opts.init == "zero_pi":
        return zero_pi_params(mf, opts.rank)
    return warm_start_params(mf, opts.rank)


def check_descent(trace, slack=DESCENT_SLACK):
    """Raise NumericalError if the trace increases beyond the allowed slack."""
    trace = np.asarray(trace, dtype=float)
    for i in range(len(trace) - 1):
        if trace[i + 1] > trace[i] + slack * abs(trace[i]) + 1e-12:
            raise NumericalError(
                f"objective increased at step {i + 1}: {trace[i]:.12g} -> {trace[i + 1]:.12g}"
            )


def fit(mf, opts, state_callback=None):
    """Run the majorize-minimize loop until the objective stalls.

    Stops when |F_prev - F| <= rel_tol * max(1, |F_prev|) or after
    ``opts.max_iter`` Pi updates. The returned trace contains the initial
    objective followed by one value per iteration and is verified to be
    nonincreasing (within a small relative slack) before returning.

    Parameters
    ----------
    mf : MatrixForm
    opts : SolverOptions
    state_callback : callable, optional
        Called with the SolverState after every iteration.

    Returns
    -------
    FitReport
    """
    if not isinstance(mf, MatrixForm):
        raise DimensionError("fit expects a MatrixForm")
    if opts.rank >= mf.k:
        raise DimensionError(f"rank must be < K, got rank={opts.rank}, K={mf.k}")
    cfg = opts.cfg
    start = time.perf_counter()
    params = _resolve_init(mf, opts)
    state = SolverState(params=params)
    state.obj_trace.append(penalized_objective(params, mf, cfg))
    terminated = "max_iter"

    for iteration in range(1, opts.max_iter + 1):
        w = robust_weights(params, mf, loss=cfg.loss, df=cfg.df)
        dyb, ylagb, dxb = weighted_blocks(mf, w)
        a_mat, cross = _projected_products(dyb, ylagb, dxb)
        q = q_coefficients(params.pi, cfg.rat)
        _, h = surrogate_quadratic(a_mat, params.sigma, cfg.xi, q, cross)
        psi = psi_bound(a_mat, params.sigma, cfg.xi, q)
        target = proximal_target(params.pi, a_mat, params.sigma, cfg.xi, q, h, psi)
        pi_new = rank_truncate(target, opts.rank)
        gamma_new, sigma_new = closed_form_gamma_sigma(pi_new, dyb, ylagb, dxb)
        params = VecmParams(
            k=params.k, p=params.p, r=opts.rank, pi=pi_new, gamma=gamma_new, sigma=sigma_new
        )

        state.params = params
        state.weights = w
        state.qvec = q
        state.psi = psi
        state.iteration = iteration
        f_prev = state.obj_trace[-1]
        f_new = penalized_objective(params, mf, cfg)
        state.obj_trace.append(f_new)
        if state_callback is not None:
            state_callback(state)
        if abs(f_prev - f_new) <= opts.rel_tol * max(1.0, abs(f_prev)):
            terminated = "converged"
            break

    check_descent(state.obj_trace)
    factors = factorize_pi(params.pi, opts.rank)
    return FitReport(
        params=params,
        factors=factors,
        obj_trace=np.asarray(state.obj_trace),
        iterations=state.iteration,
        terminated=terminated,
        wall_time=time.perf_counter() - start,
    )
