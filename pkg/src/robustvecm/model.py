"""Error-correction model parameterization and matrix-form regression blocks.

A K-dimensional error correction system with lag order p writes the first
difference of the series as

    dy_t = nu + Pi y_{t-1} + sum_{i=1}^{p-1} G_i dy_{t-i} + e_t,

with Pi of reduced rank r (the number of cointegration relations). Stacking
the sample over t gives the regression blocks

    dY = Pi Ylag + Gamma dX + E,

where Gamma = [G_1, ..., G_{p-1}, nu] and each column of dX stacks the lagged
differences followed by a constant 1 for the drift.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, RankViolationError

#: Relative singular-value threshold used for rank checks.
RANK_TOL = 1e-8

#: Relative symmetry tolerance for scatter matrices.
SYM_TOL = 1e-12


def _frozen_array(values, dtype=float):
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class VecmParams:
    """Full parameter set of the error correction model.

    Attributes
    ----------
    k : int
        Series dimension (K >= 1).
    p : int
        Lag order of the underlying VAR (p >= 1).
    r : int
        Rank budget for ``pi`` (0 <= r <= k).
    pi : (k, k) ndarray
        Long-run matrix; rank(pi) <= r is enforced at construction.
    gamma : (k, k*(p-1)+1) ndarray
        Short-run blocks [G_1, ..., G_{p-1}, nu]; the last column is the drift.
    sigma : (k, k) ndarray
        Symmetric positive definite scatter matrix.
    """

    k: int
    p: int
    r: int
    pi: np.ndarray
    gamma: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        if self.k < 1 or self.p < 1:
            raise DimensionError(f"need k >= 1 and p >= 1, got k={self.k}, p={self.p}")
        if not 0 <= self.r <= self.k:
            raise DimensionError(f"rank must satisfy 0 <= r <= k, got r={self.r}, k={self.k}")
        pi = _frozen_array(self.pi)
        gamma = _frozen_array(self.gamma)
        sigma = _frozen_array(self.sigma)
        if pi.shape != (self.k, self.k):
            raise DimensionError(f"pi must be {(self.k, self.k)}, got {pi.shape}")
        if gamma.shape != (self.k, self.n_gamma_cols):
            raise DimensionError(
                f"gamma must be {(self.k, self.n_gamma_cols)}, got {gamma.shape}"
            )
        if sigma.shape != (self.k, self.k):
            raise DimensionError(f"sigma must be {(self.k, self.k)}, got {sigma.shape}")
        for name, arr in (("pi", pi), ("gamma", gamma), ("sigma", sigma)):
            if not np.isfinite(arr).all():
                raise DataError(f"{name} contains non-finite entries")

        s = np.linalg.svd(pi, compute_uv=False)
        if self.r < self.k and s[self.r] > RANK_TOL * s[0]:
            raise RankViolationError(
                f"pi has effective rank above {self.r}: trailing singular values "
                f"{s[self.r:]} exceed {RANK_TOL:g} * {s[0]:g}",
                singular_values=s,
            )

        asym = np.linalg.norm(sigma - sigma.T)
        if asym > SYM_TOL * max(np.linalg.norm(sigma), 1e-300):
            raise DataError(f"sigma is not symmetric (relative asymmetry {asym:g})")
        eigs = np.linalg.eigvalsh(sigma)
        if eigs[0] <= 0.0:
            raise DataError(f"sigma is not positive definite (min eigenvalue {eigs[0]:g})")

        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_gamma_cols(self):
        return self.k * (self.p - 1) + 1

    @property
    def drift(self):
        """Drift vector nu (last column of gamma)."""
        return self.gamma[:, -1]

    def gamma_block(self, i):
        """Short-run coefficient block G_i for i in 1..p-1."""
        if not 1 <= i <= self.p - 1:
            raise DimensionError(f"gamma block index must be in [1, {self.p - 1}], got {i}")
        return self.gamma[:, (i - 1) * self.k : i * self.k]


@dataclass(frozen=True)
class CointFactors:
    """Factorization Pi = alpha @ beta.T with beta.T @ beta = I_r."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = _frozen_array(self.alpha)
        beta = _frozen_array(self.beta)
        if alpha.shape != beta.shape:
            raise DimensionError(
                f"alpha and beta must share a shape, got {alpha.shape} vs {beta.shape}"
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def pi(self):
        return self.alpha @ self.beta.T


@dataclass(frozen=True)
class SamplePath:
    """Observed series plus the pre-sample values needed to form lags.

    ``presample`` holds the levels before t=1 (oldest first, most recent
    last); ``observations`` holds y_1 .. y_N columnwise. The sample length
    must exceed the series dimension.
    """

    presample: np.ndarray
    observations: np.ndarray

    def __post_init__(self):
        presample = _frozen_array(self.presample)
        observations = _frozen_array(self.observations)
        if presample.ndim != 2 or observations.ndim != 2:
            raise DimensionError("presample and observations must be 2-d arrays")
        if presample.shape[0] != observations.shape[0]:
            raise DimensionError(
                f"row mismatch: presample has {presample.shape[0]} rows, "
                f"observations {observations.shape[0]}"
            )
        if presample.shape[1] < 1:
            raise DimensionError("at least one presample column is required")
        k, n = observations.shape
        if n <= k:
            raise DimensionError(f"sample length must exceed dimension, got N={n}, K={k}")
        if not np.isfinite(presample).all() or not np.isfinite(observations).all():
            raise DataError("sample path contains non-finite entries")
        object.__setattr__(self, "presample", presample)
        object.__setattr__(self, "observations", observations)

    @property
    def k(self):
        return self.observations.shape[0]

    @property
    def n(self):
        return self.observations.shape[1]


@dataclass(frozen=True)
class MatrixForm:
    """Stacked regression blocks dY, Ylag, dX of the sampled system."""

    dy: np.ndarray
    ylag: np.ndarray
    dx: np.ndarray

    def __post_init__(self):
        dy = _frozen_array(self.dy)
        ylag = _frozen_array(self.ylag)
        dx = _frozen_array(self.dx)
        if not (dy.ndim == ylag.ndim == dx.ndim == 2):
            raise DimensionError("matrix-form blocks must be 2-d arrays")
        if dy.shape != ylag.shape:
            raise DimensionError(f"dY and Ylag disagree: {dy.shape} vs {ylag.shape}")
        if dx.shape[1] != dy.shape[1]:
            raise DimensionError(
                f"dX has {dx.shape[1]} columns but dY has {dy.shape[1]}"
            )
        if not np.all(dx[-1] == 1.0):
            raise DimensionError("last row of dX must be the all-ones drift regressor")
        object.__setattr__(self, "dy", dy)
        object.__setattr__(self, "ylag", ylag)
        object.__setattr__(self, "dx", dx)

    @property
    def k(self):
        return self.dy.shape[0]

    @property
    def n(self):
        return self.dy.shape[1]


def assemble_matrix_form(path, p):
    """Build the regression blocks dY, Ylag, dX from a sample path.

    Column t (1-based) of the result pairs dy_t with y_{t-1} and with the
    stacked lagged differences [dy_{t-1}; ...; dy_{t-p+1}; 1]. The most
    recent p presample columns provide the values needed at t=1.

    Parameters
    ----------
    path : SamplePath
    p : int
        Lag order; ``path.presample`` must have at least p columns.

    Returns
    -------
    MatrixForm
    """
    if p < 1:
        raise DimensionError(f"lag order must be >= 1, got {p}")
    if path.presample.shape[1] < p:
        raise DimensionError(
            f"need at least {p} presample columns, got {path.presample.shape[1]}"
        )
    k, n = path.k, path.n
    full = np.hstack([path.presample[:, -p:], path.observations])
    diffs = np.diff(full, axis=1)  # column j is y[j+1] - y[j]

    dy = diffs[:, p - 1 :]
    ylag = full[:, p - 1 : p - 1 + n]
    blocks = [diffs[:, p - 1 - i : p - 1 - i + n] for i in range(1, p)]
    blocks.append(np.ones((1, n)))
    dx = np.vstack(blocks)
    return MatrixForm(dy=dy, ylag=ylag, dx=dx)


def residuals(params, mf):
    """Innovation estimates dY - Pi Ylag - Gamma dX, one column per sample."""
    if params.k != mf.k:
        raise DimensionError(f"params have K={params.k} but data have K={mf.k}")
    if params.gamma.shape[1] != mf.dx.shape[0]:
        raise DimensionError(
            f"gamma has {params.gamma.shape[1]} columns but dX has {mf.dx.shape[0]} rows"
        )
    return mf.dy - params.pi @ mf.ylag - params.gamma @ mf.dx


def factorize_pi(pi, r, rank_tol=RANK_TOL):
    """Factor a rank-r matrix as alpha @ beta.T with orthonormal beta.

    beta collects the top-r right singular vectors (so beta.T @ beta = I_r)
    and alpha absorbs the singular values. Raises RankViolationError when the
    trailing singular values exceed ``rank_tol`` times the largest one.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise DimensionError(f"pi must be square, got {pi.shape}")
    k = pi.shape[0]
    if not 0 <= r <= k:
        raise DimensionError(f"rank must satisfy 0 <= r <= {k}, got {r}")
    u, s, vt = np.linalg.svd(pi)
    if r < k and s[r] > rank_tol * s[0]:
        raise RankViolationError(
            f"effective rank exceeds {r}: singular values {s[r:]} vs "
            f"tolerance {rank_tol:g} * {s[0]:g}",
            singular_values=s,
        )
    alpha = u[:, :r] * s[:r]
    beta = vt[:r].T
    return CointFactors(alpha=alpha, beta=beta)


def companion_matrix(params):
    """Companion matrix of the VAR(p) equivalent of (Pi, Gamma).

    The level-form coefficients are A_1 = I + Pi + G_1, A_i = G_i - G_{i-1}
    for 1 < i < p, and A_p = -G_{p-1} (A_1 = I + Pi when p = 1). Eigenvalues
    of the companion determine stability: cointegration of rank r leaves
    exactly K - r roots on the unit circle.
    """
    k, p = params.k, params.p
    blocks = []
    eye = np.eye(k)
    if p == 1:
        blocks.append(eye + params.pi)
    else:
        blocks.append(eye + params.pi + params.gamma_block(1))
        for i in range(2, p):
            blocks.append(params.gamma_block(i) - params.gamma_block(i - 1))
        blocks.append(-params.gamma_block(p - 1))
    top = np.hstack(blocks)
    if p == 1:
        return top
    lower = np.hstack([np.eye(k * (p - 1)), np.zeros((k * (p - 1), k))])
    return np.vstack([top, lower])
