"""Robust losses, the smoothed rational group penalty, and the weight family.

The heavy-tail robust loss is the negative log-likelihood of an elliptical
Cauchy model (constants dropped):

    L = (N/2) logdet(Sigma) + ((1+K)/2) sum_t log(1 + delta_t),

with delta_t = r_t' Sigma^{-1} r_t the squared Mahalanobis distance of the
residual r_t. A Student-t loss with df degrees of freedom replaces the sum
by ((df+K)/2) log(1 + delta_t/df); the Gaussian loss uses (1/2) sum delta_t.

Column-wise group sparsity on Pi is induced by a smoothed rational (Geman)
function applied to each column 2-norm; the smoothing replaces the kink at
zero with a quadratic cap of width ``eps`` so the penalty is C^1.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import DimensionError, NumericalError
from .model import residuals

LOSS_KINDS = ("cauchy", "student", "gaussian")


@dataclass(frozen=True)
class RatParams:
    """Parameters of the smoothed rational penalty.

    ``scale`` is the saturation scale of |x|/(scale+|x|); ``eps`` is the
    smoothing threshold below which the penalty is quadratic.
    """

    scale: float
    eps: float

    def __post_init__(self):
        if not (self.scale > 0 and self.eps > 0):
            raise DimensionError(
                f"rat parameters must be positive, got scale={self.scale}, eps={self.eps}"
            )


def default_rat_params(k):
    """Default penalty parameters: scale 0.1*sqrt(K), smoothing width 1e-3."""
    return RatParams(scale=0.1 * np.sqrt(k), eps=1e-3)


@dataclass(frozen=True)
class ObjectiveConfig:
    """Loss + penalty configuration.

    ``xi`` weights the group penalty; ``loss`` is one of 'cauchy', 'student',
    'gaussian', with ``df`` the Student-t degrees of freedom.
    """

    rat: RatParams
    xi: float
    loss: str = "cauchy"
    df: float = None

    def __post_init__(self):
        if self.xi < 0:
            raise DimensionError(f"xi must be nonnegative, got {self.xi}")
        if self.loss not in LOSS_KINDS:
            raise DimensionError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if self.loss == "student" and not (self.df is not None and self.df > 0):
            raise DimensionError(f"student loss needs df > 0, got {self.df}")


def rat_value(x, rp):
    """Smoothed rational function, elementwise.

    Quadratic scale*x^2 / (2 eps (scale+eps)^2) for |x| <= eps, and the
    shifted saturating branch |x|/(scale+|x|) - (2 eps^2 + scale*eps) /
    (2 (scale+eps)^2) beyond; continuous with matching derivative at |x|=eps.
    """
    x = np.abs(np.asarray(x, dtype=float))
    p, e = rp.scale, rp.eps
    shift = (2.0 * e * e + p * e) / (2.0 * (p + e) ** 2)
    inner = p * x * x / (2.0 * e * (p + e) ** 2)
    outer = x / (p + x) - shift
    return np.where(x <= e, inner, outer)


def rat_curvature(x, rp):
    """Tight quadratic-majorizer coefficient q(x) of the smoothed penalty.

    q(x) = scale / (m (scale+m)^2) with m = max(eps, |x|); (q/2) t^2 + const
    upper-bounds rat(t) everywhere with equality at t = x, and q(x)*x is the
    exact derivative of rat at x.
    """
    m = np.maximum(rp.eps, np.abs(np.asarray(x, dtype=float)))
    return rp.scale / (m * (rp.scale + m) ** 2)


def rat_majorizer_constant(x, rp):
    """Additive constant pairing with ``rat_curvature`` so the quadratic touches.

    c(x) = rat(x) - (q(x)/2) x^2, written in closed form.
    """
    p, e = rp.scale, rp.eps
    m = np.maximum(e, np.abs(np.asarray(x, dtype=float)))
    return (p * m + 2.0 * m * m) / (2.0 * (p + m) ** 2) - (p * e + 2.0 * e * e) / (
        2.0 * (p + e) ** 2
    )


def group_regularizer(pi, rp):
    """Sum of the smoothed rational penalty over the column 2-norms of pi."""
    norms = np.linalg.norm(np.asarray(pi, dtype=float), axis=0)
    return float(rat_value(norms, rp).sum())


def _scatter_cholesky(sigma):
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"scatter matrix is not positive definite: {exc}") from exc


def mahalanobis_sq(resid, sigma):
    """Per-column squared Mahalanobis distances r_t' Sigma^{-1} r_t."""
    chol = _scatter_cholesky(sigma)
    half = solve_triangular(chol, resid, lower=True)
    return np.einsum("ij,ij->j", half, half)


def _loss_from_delta(delta, sigma, n, k, loss, df):
    chol = _scatter_cholesky(sigma)
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    if loss == "gaussian":
        return 0.5 * n * logdet + 0.5 * float(delta.sum())
    if loss == "cauchy":
        c, s = 0.5 * (1.0 + k), 1.0
    elif loss == "student":
        c, s = 0.5 * (df + k), float(df)
    else:
        raise DimensionError(f"unknown loss kind {loss!r}")
    return 0.5 * n * logdet + c * float(np.log1p(delta / s).sum())


def loss_value(params, mf, loss="cauchy", df=None):
    """Negative log-likelihood loss of the residuals under the given family."""
    if loss == "student" and not (df is not None and df > 0):
        raise DimensionError(f"student loss needs df > 0, got {df}")
    delta = mahalanobis_sq(residuals(params, mf), params.sigma)
    return _loss_from_delta(delta, params.sigma, mf.n, params.k, loss, df)


def cauchy_loss(params, mf):
    """Cauchy negative log-likelihood loss (constants dropped)."""
    return loss_value(params, mf, loss="cauchy")


def penalized_objective(params, mf, cfg):
    """Loss plus xi times the group penalty on the columns of pi."""
    return loss_value(params, mf, loss=cfg.loss, df=cfg.df) + cfg.xi * group_regularizer(
        params.pi, cfg.rat
    )


def weight_values(delta, k, loss, df=None):
    """Robust reweighting factors from squared Mahalanobis distances.

    Cauchy: (1+K)/(1+delta); Student-t: (df+K)/(df+delta); Gaussian: 1.
    These are exactly twice the derivative of the per-sample loss term with
    respect to delta, so a weighted Gaussian step is a tight tangent model.
    """
    delta = np.asarray(delta, dtype=float)
    if loss == "gaussian":
        return np.ones_like(delta)
    if loss == "cauchy":
        return (1.0 + k) / (1.0 + delta)
    if loss == "student":
        if not (df is not None and df > 0):
            raise DimensionError(f"student weights need df > 0, got {df}")
        return (df + k) / (df + delta)
    raise DimensionError(f"unknown loss kind {loss!r}")


def robust_weights(params, mf, loss="cauchy", df=None):
    """Per-sample robust weights at the current parameters."""
    delta = mahalanobis_sq(residuals(params, mf), params.sigma)
    return weight_values(delta, params.k, loss, df)


def objective_gradients(params, mf, cfg):
    """Analytic gradients of the penalized objective in (pi, gamma).

    grad_pi = -Sigma^{-1} R W Ylag' + xi * pi * diag(q(column norms)),
    grad_gamma = -Sigma^{-1} R W dX', with R the residual matrix and W the
    diagonal of robust weights. Valid wherever the penalty is smooth (the
    smoothed rational is C^1 everywhere).
    """
    resid = residuals(params, mf)
    delta = mahalanobis_sq(resid, params.sigma)
    w = weight_values(delta, params.k, cfg.loss, cfg.df)
    try:
        cf = cho_factor(params.sigma, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded upstream
        raise NumericalError(f"scatter matrix is not positive definite: {exc}") from exc
    weighted = cho_solve(cf, resid * w)
    grad_pi = -(weighted @ mf.ylag.T)
    grad_gamma = -(weighted @ mf.dx.T)
    if cfg.xi > 0:
        norms = np.linalg.norm(params.pi, axis=0)
        grad_pi = grad_pi + cfg.xi * params.pi * rat_curvature(norms, cfg.rat)
    return grad_pi, grad_gamma
