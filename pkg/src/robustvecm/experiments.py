"""Monte Carlo harness: convergence comparison and NMSE vs tail weight.

Replications are paired: the dataset for a (df, rep) cell is generated from
a seed that depends only on the cell, never on the estimator, so every loss
family sees identical data. Estimation error is scored by the normalized
mean squared error NMSE = ||Pi_hat - Pi_true||_F^2 / ||Pi_true||_F^2, with
the Monte Carlo mean over replications reported per cell.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .baselines import GdOptions, fit_gd, fit_with_loss
from .errors import DataError, DimensionError, RobustVecmError
from .model import assemble_matrix_form
from .objective import ObjectiveConfig, default_rat_params
from .simulate import DgpSpec, make_ground_truth, simulate_path
from .solver import SolverOptions, fit, warm_start_params

#: Default degrees-of-freedom sweep, heavy tails through near-Gaussian.
DEFAULT_DF_GRID = (2.5, 3.0, 4.0, 5.0, 7.0, 10.0, 20.0)

#: Default replication count (desk scale; use 50 for full scale).
DEFAULT_REPS = 20


@dataclass(frozen=True)
class BenchSpec:
    """Sweep specification: DGP template, df grid, replication count, losses.

    ``dgp`` supplies the dimensions; its innovation/df/seed fields are
    overridden per cell. The replication seed is seed_base + cell index in
    (df-major, rep-minor) order.
    """

    dgp: DgpSpec
    df_grid: tuple = DEFAULT_DF_GRID
    reps: int = DEFAULT_REPS
    losses: tuple = ("cauchy", "student", "gaussian")
    seed_base: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise DimensionError(f"reps must be >= 1, got {self.reps}")
        grid = tuple(float(d) for d in self.df_grid)
        if len(grid) == 0:
            raise DimensionError("df_grid must be nonempty")
        if any(d <= 0 for d in grid):
            raise DimensionError(f"df_grid must be positive, got {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DimensionError(f"df_grid must be strictly increasing, got {grid}")
        losses = tuple(self.losses)
        for loss in losses:
            if loss not in ("cauchy", "student", "gaussian"):
                raise DimensionError(f"unknown loss {loss!r}")
        object.__setattr__(self, "df_grid", grid)
        object.__setattr__(self, "losses", losses)


@dataclass(frozen=True)
class RepResult:
    """One (df, rep, loss) cell: score, iteration count, timing, error note."""

    df: float
    rep: int
    loss: str
    nmse: float
    iterations: int
    seconds: float
    error: str = None


@dataclass(frozen=True)
class NmseRow:
    """Aggregate over replications for one (df, loss) cell."""

    df: float
    loss: str
    mean_nmse: float
    stderr_nmse: float
    reps: int
    failures: int


@dataclass(frozen=True)
class NmseTable:
    """Aggregated sweep results plus the per-replication audit trail."""

    rows: tuple
    per_rep: tuple
    xi_rule: str


def nmse(pi_hat, pi_true):
    """Normalized squared estimation error of the long-run matrix."""
    pi_hat = np.asarray(pi_hat, dtype=float)
    pi_true = np.asarray(pi_true, dtype=float)
    denom = float(np.sum(pi_true**2))
    if denom == 0.0:
        raise DataError("NMSE is undefined for a zero true matrix")
    return float(np.sum((pi_hat - pi_true) ** 2)) / denom


def default_xi(mf):
    """Scale-aware penalty weight: 0.1 * sqrt(N) * MAD of the differenced data.

    MAD is the median absolute deviation about the median of the pooled
    entries of dY.
    """
    pooled = mf.dy.ravel()
    mad = float(np.median(np.abs(pooled - np.median(pooled))))
    return 0.1 * np.sqrt(mf.n) * mad


XI_RULE = "xi = 0.1*sqrt(N)*median(|dY - median(dY)|), dY entries pooled"


def replication_seed(spec, df_index, rep):
    """Seed for a (df, rep) cell: seed_base + cell index, estimator-independent."""
    return spec.seed_base + df_index * spec.reps + rep


def _cell_dataset(spec, df, seed):
    dgp = replace(spec.dgp, innovation="student", df=float(df), seed=int(seed))
    truth = make_ground_truth(dgp)
    path = simulate_path(truth, dgp)
    mf = assemble_matrix_form(path, dgp.p)
    return truth, mf


def run_nmse_sweep(spec, max_iter=2000, rel_tol=1e-8):
    """Paired sweep over the df grid: simulate once per cell, fit every loss.

    Failed replications are recorded with nmse = nan and the error message,
    excluded from the aggregates, and counted in the row's ``failures``.
    Deterministic in spec.seed_base (timing fields aside).
    """
    rat = default_rat_params(spec.dgp.k)
    records = []
    for df_index, df in enumerate(spec.df_grid):
        for rep in range(spec.reps):
            seed = replication_seed(spec, df_index, rep)
            try:
                truth, mf = _cell_dataset(spec, df, seed)
            except RobustVecmError as exc:
                for loss in spec.losses:
                    records.append(
                        RepResult(df, rep, loss, float("nan"), 0, 0.0,
                                  f"{type(exc).__name__}: {exc}")
                    )
                continue
            xi = default_xi(mf)
            for loss in spec.losses:
                cfg = ObjectiveConfig(
                    rat=rat, xi=xi, loss=loss, df=(df if loss == "student" else None)
                )
                opts = SolverOptions(
                    rank=spec.dgp.r, cfg=cfg, max_iter=max_iter, rel_tol=rel_tol
                )
                t0 = time.perf_counter()
                try:
                    report = fit_with_loss(mf, opts)
                except RobustVecmError as exc:
                    records.append(
                        RepResult(df, rep, loss, float("nan"), 0,
                                  time.perf_counter() - t0,
                                  f"{type(exc).__name__}: {exc}")
                    )
                    continue
                records.append(
                    RepResult(
                        df, rep, loss,
                        nmse(report.params.pi, truth.params.pi),
                        report.iterations,
                        time.perf_counter() - t0,
                    )
                )
    return NmseTable(
        rows=tuple(aggregate_records(records, spec)),
        per_rep=tuple(records),
        xi_rule=XI_RULE,
    )


def aggregate_records(records, spec):
    """Reduce per-replication records to per-(df, loss) means and stderrs.

    Reduction happens in deterministic (df, loss) order; nan scores count as
    failures and are excluded from the statistics.
    """
    rows = []
    for df in spec.df_grid:
        for loss in spec.losses:
            scores = [
                rec.nmse
                for rec in records
                if rec.df == df and rec.loss == loss and np.isfinite(rec.nmse)
            ]
            failures = sum(
                1
                for rec in records
                if rec.df == df and rec.loss == loss and not np.isfinite(rec.nmse)
            )
            if scores:
                mean = float(np.mean(scores))
                stderr = (
                    float(np.std(scores, ddof=1) / np.sqrt(len(scores)))
                    if len(scores) > 1
                    else 0.0
                )
            else:
                mean, stderr = float("nan"), float("nan")
            rows.append(NmseRow(df, loss, mean, stderr, len(scores), failures))
    return rows


def run_convergence(dgp, xi=None, max_iter_mm=2000, max_iter_gd=5000, rel_tol=1e-8):
    """Fit the same dataset with both solvers from one shared initialization.

    Returns ``(reports, truth)`` where reports maps 'mm' and 'gd' to their
    FitReports; both traces start from exactly the same initial objective.
    """
    truth = make_ground_truth(dgp)
    path = simulate_path(truth, dgp)
    mf = assemble_matrix_form(path, dgp.p)
    if xi is None:
        xi = default_xi(mf)
    cfg = ObjectiveConfig(rat=default_rat_params(dgp.k), xi=xi, loss="cauchy")
    init = warm_start_params(mf, dgp.r)
    mm = fit(mf, SolverOptions(rank=dgp.r, cfg=cfg, max_iter=max_iter_mm,
                               rel_tol=rel_tol, init=init))
    gd = fit_gd(mf, GdOptions(rank=dgp.r, cfg=cfg, max_iter=max_iter_gd,
                              rel_tol=rel_tol, init=init))
    return {"mm": mm, "gd": gd}, truth


def iterations_to_level(trace, level):
    """First iteration index at which the trace is <= level (None if never)."""
    trace = np.asarray(trace, dtype=float)
    hits = np.nonzero(trace <= level)[0]
    return int(hits[0]) if hits.size else None
