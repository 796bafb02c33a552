"""Ground-truth generation and path simulation for cointegrated systems.

The generator draws a long-run matrix Pi = alpha @ beta.T whose column
support has a prescribed size (group-sparse columns), weak short-run
dynamics, and a well-conditioned scatter matrix, then rejects draws until
the companion matrix shows exactly K - r unit roots with all remaining
roots safely inside the unit circle. Paths are simulated by iterating the
difference recursion from a zero start and discarding a burn-in window.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, GenerationError, SimulationOverflowError
from .model import SamplePath, VecmParams, companion_matrix

INNOVATION_KINDS = ("gaussian", "student", "cauchy")

#: Attempted draws before ground-truth generation gives up.
MAX_DRAWS = 60

#: Halvings of alpha tried per draw before redrawing.
HALVING_LEVELS = 8

#: |modulus - 1| below this counts as a unit root.
UNIT_ROOT_TOL = 1e-6

#: Non-unit roots must have modulus at most 1 minus this margin.
STABILITY_MARGIN = 1e-3


@dataclass(frozen=True)
class DgpSpec:
    """Data-generating-process specification.

    ``active_columns`` is the number of nonzero columns of Pi (the group
    support size); ``innovation`` is 'gaussian', 'student' (with ``df``
    degrees of freedom), or 'cauchy'. ``noise_scale`` multiplies the
    innovations; 0 gives the noise-free limit.
    """

    k: int
    p: int
    r: int
    n: int
    active_columns: int
    innovation: str = "gaussian"
    df: float = None
    seed: int = 0
    noise_scale: float = 1.0
    burn_in: int = 200

    def __post_init__(self):
        if self.k < 1 or self.p < 1 or self.n < 1:
            raise DimensionError(
                f"need k, p, n >= 1, got k={self.k}, p={self.p}, n={self.n}"
            )
        if not 0 <= self.r <= self.k:
            raise DimensionError(f"need 0 <= r <= k, got r={self.r}, k={self.k}")
        if not self.r <= self.active_columns <= self.k:
            raise DimensionError(
                f"need r <= active_columns <= k, got r={self.r}, "
                f"active_columns={self.active_columns}, k={self.k}"
            )
        if self.innovation not in INNOVATION_KINDS:
            raise DimensionError(
                f"innovation must be one of {INNOVATION_KINDS}, got {self.innovation!r}"
            )
        if self.innovation == "student" and not (self.df is not None and self.df > 0):
            raise DimensionError(f"student innovations need df > 0, got {self.df}")
        if self.noise_scale < 0:
            raise DimensionError(f"noise_scale must be >= 0, got {self.noise_scale}")
        if self.burn_in < 0:
            raise DimensionError(f"burn_in must be >= 0, got {self.burn_in}")


@dataclass(frozen=True)
class GroundTruth:
    """Generated parameters, the active column support of Pi, and (optionally)
    a simulated path."""

    params: VecmParams
    support: tuple
    path: SamplePath = None


def stability_moduli(params):
    """Sorted (descending) moduli of the companion-matrix eigenvalues."""
    ev = np.linalg.eigvals(companion_matrix(params))
    return np.sort(np.abs(ev))[::-1]


def check_stability(params, r):
    """True when the companion spectrum matches rank-r cointegration.

    Exactly K - r roots must lie within ``UNIT_ROOT_TOL`` of modulus 1 and
    every remaining root must have modulus at most 1 - ``STABILITY_MARGIN``.
    """
    mods = stability_moduli(params)
    near_unit = np.abs(mods - 1.0) <= UNIT_ROOT_TOL
    if near_unit.sum() != params.k - r:
        return False
    rest = mods[~near_unit]
    return rest.size == 0 or rest.max() <= 1.0 - STABILITY_MARGIN


def _draw_structure(spec, rng):
    k, r, s = spec.k, spec.r, spec.active_columns
    alpha = rng.standard_normal((k, r)) * (0.5 / np.sqrt(k))
    support = np.sort(rng.choice(k, size=s, replace=False))
    beta = np.zeros((k, r))
    if r > 0:
        block = rng.standard_normal((s, r))
        q, _ = np.linalg.qr(block)
        beta[support] = q[:, :r]
    # recenter the error-correction spectrum: eigenvalues of beta' alpha move
    # from a disk around 0 to one around -0.5, without which most draws are
    # unstable once r is large (all r eigenvalues must lie in the stable set)
    alpha = alpha - 0.5 * beta
    gamma = np.zeros((k, k * (spec.p - 1) + 1))
    if spec.p > 1:
        gamma[:, :-1] = rng.standard_normal((k, k * (spec.p - 1))) * (0.2 / np.sqrt(k))
    a = rng.standard_normal((k, k))
    sigma = a @ a.T / k + 0.1 * np.eye(k)
    return alpha, beta, support, gamma, sigma


def make_ground_truth(spec):
    """Draw stable group-sparse ground-truth parameters (no path).

    Each attempt draws (alpha, beta, gamma, sigma) and tries a ladder of
    halvings of alpha until the companion spectrum passes the stability
    check; after ``MAX_DRAWS`` failed draws a GenerationError is raised.
    Deterministic in ``spec.seed``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed).spawn(2)[0])
    for _ in range(MAX_DRAWS):
        alpha, beta, support, gamma, sigma = _draw_structure(spec, rng)
        for level in range(HALVING_LEVELS):
            pi = (alpha * 0.5**level) @ beta.T
            params = VecmParams(
                k=spec.k, p=spec.p, r=spec.r, pi=pi, gamma=gamma, sigma=sigma
            )
            if check_stability(params, spec.r):
                return GroundTruth(params=params, support=tuple(int(i) for i in support))
    raise GenerationError(
        f"no stable draw found in {MAX_DRAWS} attempts "
        f"({HALVING_LEVELS} rescalings each)",
        attempts=MAX_DRAWS,
    )


def draw_innovations(kind, sigma, rng, n, df=None, scale=1.0):
    """Draw n innovation columns from the elliptical family.

    Gaussian: Sigma^{1/2} z. Student-t(df): Sigma^{1/2} z / sqrt(g/df) with
    g ~ chi-square(df) per column. Cauchy is Student-t with df = 1.
    """
    sigma = np.asarray(sigma, dtype=float)
    k = sigma.shape[0]
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise DataError(f"innovation scatter must be positive definite: {exc}") from exc
    z = chol @ rng.standard_normal((k, n))
    if kind == "gaussian":
        out = z
    elif kind in ("student", "cauchy"):
        dof = 1.0 if kind == "cauchy" else float(df)
        if not dof > 0:
            raise DimensionError(f"student innovations need df > 0, got {df}")
        g = rng.chisquare(dof, size=n)
        out = z / np.sqrt(g / dof)
    else:
        raise DimensionError(f"unknown innovation kind {kind!r}")
    return out * scale


def propagate(params, presample, n, innovations=None):
    """Iterate the difference recursion for n steps from given presample levels.

    ``presample`` must supply at least p level columns (oldest first);
    ``innovations`` is a (K, n) array or None for the noise-free recursion.
    Raises SimulationOverflowError if the state leaves the finite range.
    """
    presample = np.asarray(presample, dtype=float)
    if presample.ndim != 2 or presample.shape[0] != params.k:
        raise DimensionError(
            f"presample must be ({params.k}, >= {params.p}), got {presample.shape}"
        )
    if presample.shape[1] < params.p:
        raise DimensionError(
            f"need at least {params.p} presample columns, got {presample.shape[1]}"
        )
    if innovations is None:
        innovations = np.zeros((params.k, n))
    innovations = np.asarray(innovations, dtype=float)
    if innovations.shape != (params.k, n):
        raise DimensionError(
            f"innovations must be ({params.k}, {n}), got {innovations.shape}"
        )

    p = params.p
    levels = np.empty((params.k, p + n))
    levels[:, :p] = presample[:, -p:]
    drift = params.drift
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n):
            j = p + t
            y_prev = levels[:, j - 1]
            dy = drift + params.pi @ y_prev + innovations[:, t]
            for i in range(1, p):
                dy = dy + params.gamma_block(i) @ (levels[:, j - i] - levels[:, j - i - 1])
            y_new = y_prev + dy
            if not np.isfinite(y_new).all():
                raise SimulationOverflowError(
                    f"state became non-finite at step {t + 1} of {n}"
                )
            levels[:, j] = y_new
    return SamplePath(presample=levels[:, :p], observations=levels[:, p:])


def simulate_path(truth, spec):
    """Simulate a sample path of length spec.n from the ground truth.

    The recursion starts from zero levels, runs ``spec.burn_in`` discarded
    steps plus ``spec.n`` kept steps, and returns the kept window with the
    preceding p levels as presample. Deterministic in ``spec.seed`` and
    independent of the draws used by make_ground_truth.
    """
    params = truth.params
    if not check_stability(params, spec.r):
        raise GenerationError("ground-truth parameters fail the stability check")
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed).spawn(2)[1])
    total = spec.burn_in + spec.n
    eps = draw_innovations(
        spec.innovation, params.sigma, rng, total, df=spec.df, scale=spec.noise_scale
    )
    zeros = np.zeros((spec.k, params.p))
    full = propagate(params, zeros, total, innovations=eps)
    levels = np.hstack([full.presample, full.observations])
    # keep the last n columns; the p levels before them become the presample
    obs_start = params.p + spec.burn_in
    return SamplePath(
        presample=levels[:, obs_start - params.p : obs_start],
        observations=levels[:, obs_start:],
    )


def simulate_dataset(spec):
    """Convenience wrapper: ground truth plus simulated path."""
    truth = make_ground_truth(spec)
    path = simulate_path(truth, spec)
    return GroundTruth(params=truth.params, support=truth.support, path=path)
