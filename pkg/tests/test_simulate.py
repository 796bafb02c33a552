"""Tests for ground-truth generation and path simulation."""

import numpy as np
import pytest
from scipy import stats

from robustvecm import (
    DgpSpec,
    DimensionError,
    GenerationError,
    SimulationOverflowError,
    VecmParams,
    check_stability,
    draw_innovations,
    make_ground_truth,
    propagate,
    simulate_path,
    stability_moduli,
)
import importlib

sim_mod = importlib.import_module("robustvecm.simulate")


def test_scalar_dgp_is_contracting():
    spec = DgpSpec(k=1, p=1, r=1, n=50, active_columns=1, seed=5)
    truth = make_ground_truth(spec)
    pi = truth.params.pi[0, 0]
    assert -2.0 < pi < 0.0
    assert abs(1.0 + pi) < 1.0  # companion root strictly inside the unit circle


def test_support_and_rank_are_exact():
    spec = DgpSpec(k=5, p=2, r=3, n=100, active_columns=4, seed=9)
    truth = make_ground_truth(spec)
    pi = truth.params.pi
    off = [j for j in range(5) if j not in truth.support]
    assert len(off) == 1
    assert np.all(pi[:, off] == 0.0)  # exactly zero, not merely small
    s = np.linalg.svd(pi, compute_uv=False)
    assert s[2] > 1e-8 * s[0]
    assert s[3] <= 1e-8 * s[0]


def test_ground_truth_is_deterministic():
    spec = DgpSpec(k=4, p=2, r=2, n=60, active_columns=3, seed=123)
    a = make_ground_truth(spec)
    b = make_ground_truth(spec)
    assert np.array_equal(a.params.pi, b.params.pi)
    assert np.array_equal(a.params.gamma, b.params.gamma)
    assert np.array_equal(a.params.sigma, b.params.sigma)
    assert a.support == b.support


@pytest.mark.parametrize("k,p,r,seed", [(4, 1, 1, 0), (4, 2, 2, 1), (4, 3, 3, 2), (5, 2, 1, 3)])
def test_stability_invariant(k, p, r, seed):
    spec = DgpSpec(k=k, p=p, r=r, n=60, active_columns=k, seed=seed)
    truth = make_ground_truth(spec)
    mods = stability_moduli(truth.params)
    near_unit = np.abs(mods - 1.0) <= 1e-6
    assert near_unit.sum() == k - r
    rest = mods[~near_unit]
    assert rest.size == 0 or rest.max() <= 1.0 - 1e-3


def test_generation_failure_reports_attempts(monkeypatch):
    monkeypatch.setattr(sim_mod, "check_stability", lambda params, r: False)
    spec = DgpSpec(k=2, p=1, r=1, n=30, active_columns=2, seed=0)
    with pytest.raises(GenerationError) as excinfo:
        make_ground_truth(spec)
    assert excinfo.value.attempts == 60


def test_zero_noise_zero_state_path_is_identically_zero():
    spec = DgpSpec(k=2, p=1, r=1, n=40, active_columns=1, seed=3, noise_scale=0.0)
    truth = make_ground_truth(spec)
    path = simulate_path(truth, spec)
    assert np.all(path.presample == 0.0)
    assert np.all(path.observations == 0.0)


def test_simulation_is_deterministic():
    spec = DgpSpec(k=3, p=2, r=2, n=80, active_columns=3,
                   innovation="student", df=3.0, seed=17)
    truth = make_ground_truth(spec)
    a = simulate_path(truth, spec)
    b = simulate_path(truth, spec)
    assert np.array_equal(a.observations, b.observations)
    assert np.array_equal(a.presample, b.presample)


def test_white_noise_reduction_variance():
    # Pi = -1 makes y_t = eps_t; sample variance near the innovation variance
    params = VecmParams(k=1, p=1, r=1, pi=[[-1.0]], gamma=[[0.0]], sigma=[[2.5]])
    assert check_stability(params, 1)
    rng = np.random.default_rng(42)
    eps = draw_innovations("gaussian", params.sigma, rng, 1000)
    path = propagate(params, np.zeros((1, 1)), 1000, innovations=eps)
    assert np.allclose(path.observations, eps, atol=1e-12)
    var = path.observations.var()
    assert abs(var - 2.5) < 0.25  # within 10%


def test_propagate_overflow_raises():
    params = VecmParams(k=1, p=1, r=1, pi=[[9.0]], gamma=[[0.0]], sigma=[[1.0]])
    with pytest.raises(SimulationOverflowError):
        propagate(params, np.ones((1, 1)), 500)


def test_gaussian_innovation_covariance():
    sigma = np.array([[1.0, 0.3], [0.3, 1.0]])
    rng = np.random.default_rng(7)
    draws = draw_innovations("gaussian", sigma, rng, 100_000)
    emp = draws @ draws.T / draws.shape[1]
    assert np.abs(emp - sigma).max() < 0.05


def test_cauchy_quartiles():
    rng = np.random.default_rng(11)
    draws = draw_innovations("cauchy", np.eye(1), rng, 100_000)[0]
    q25, q75 = np.quantile(draws, [0.25, 0.75])
    assert abs(q25 + 1.0) < 0.05
    assert abs(q75 - 1.0) < 0.05


def test_student_large_df_close_to_gaussian():
    rng = np.random.default_rng(13)
    draws = draw_innovations("student", np.eye(1), rng, 10_000, df=1e6)[0]
    ks = stats.kstest(draws, "norm").statistic
    assert ks < 0.02


def test_spec_validation():
    with pytest.raises(DimensionError):
        DgpSpec(k=3, p=2, r=2, n=50, active_columns=1, seed=0)  # s < r
    with pytest.raises(DimensionError):
        DgpSpec(k=3, p=2, r=1, n=50, active_columns=2, innovation="student", seed=0)
    with pytest.raises(DimensionError):
        DgpSpec(k=3, p=2, r=1, n=50, active_columns=2, innovation="levy", seed=0)
    with pytest.raises(DimensionError):
        DgpSpec(k=3, p=2, r=4, n=50, active_columns=3, seed=0)  # r > k


def test_propagate_validates_shapes():
    params = VecmParams(k=2, p=2, r=1, pi=np.zeros((2, 2)),
                        gamma=np.zeros((2, 3)), sigma=np.eye(2))
    with pytest.raises(DimensionError):
        propagate(params, np.zeros((2, 1)), 10)  # needs p=2 presample columns
    with pytest.raises(DimensionError):
        propagate(params, np.zeros((2, 2)), 10, innovations=np.zeros((2, 9)))


def test_simulated_path_presample_matches_recursion():
    # the returned presample is the tail of the burn-in window: re-running the
    # recursion from it (with the same kept innovations) reproduces the path
    spec = DgpSpec(k=2, p=2, r=1, n=30, active_columns=2, seed=21, burn_in=50)
    truth = make_ground_truth(spec)
    path = simulate_path(truth, spec)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed).spawn(2)[1])
    eps = draw_innovations(spec.innovation, truth.params.sigma, rng,
                           spec.burn_in + spec.n, df=spec.df)
    replay = propagate(truth.params, path.presample, spec.n,
                       innovations=eps[:, spec.burn_in:])
    assert np.allclose(replay.observations, path.observations, atol=1e-12)
