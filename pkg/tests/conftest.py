"""Shared builders for randomized test instances."""

import numpy as np
import pytest

from robustvecm import (
    DgpSpec,
    MatrixForm,
    SamplePath,
    VecmParams,
    assemble_matrix_form,
    make_ground_truth,
    rank_truncate,
    simulate_path,
)


def random_spd(rng, k, jitter=0.1):
    a = rng.standard_normal((k, k))
    return a @ a.T / k + jitter * np.eye(k)


def random_params(rng, k, p, r, scale=0.3):
    """Random parameters with an exactly rank-r long-run matrix."""
    pi = rank_truncate(rng.standard_normal((k, k)) * scale, r)
    gamma = rng.standard_normal((k, k * (p - 1) + 1)) * scale
    return VecmParams(k=k, p=p, r=r, pi=pi, gamma=gamma, sigma=random_spd(rng, k))


def random_matrix_form(rng, k=2, n=6, p=1, scale=1.0):
    """Regression blocks with random data and a proper all-ones drift row."""
    dy = rng.standard_normal((k, n)) * scale
    ylag = rng.standard_normal((k, n)) * scale
    rows = [rng.standard_normal((k * (p - 1), n)) * scale] if p > 1 else []
    rows.append(np.ones((1, n)))
    return MatrixForm(dy=dy, ylag=ylag, dx=np.vstack(rows))


def random_path(rng, k=3, p=2, n=20):
    return SamplePath(
        presample=rng.standard_normal((k, p)),
        observations=rng.standard_normal((k, n)),
    )


def simulated_instance(seed, k=5, p=2, r=3, n=400, s=4, innovation="student", df=3.0):
    """Ground truth plus assembled blocks from one simulated dataset."""
    spec = DgpSpec(k=k, p=p, r=r, n=n, active_columns=s,
                   innovation=innovation, df=df, seed=seed)
    truth = make_ground_truth(spec)
    path = simulate_path(truth, spec)
    return truth, assemble_matrix_form(path, p), spec


def noise_free_instance(seed, k=5, p=2, r=3, n=200, s=4):
    """Exactly consistent zero-residual data over rich (noise-driven) regressors."""
    truth, mf, _ = simulated_instance(seed, k=k, p=p, r=r, n=n, s=s,
                                      innovation="gaussian", df=None)
    dy = truth.params.pi @ mf.ylag + truth.params.gamma @ mf.dx
    return truth, MatrixForm(dy=dy, ylag=mf.ylag, dx=mf.dx)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
