"""Tests for the majorize-minimize solver and its building blocks."""

import numpy as np
import pytest

from conftest import noise_free_instance, random_matrix_form, random_spd, simulated_instance
from robustvecm import (
    CollinearRegressorsError,
    DimensionError,
    MatrixForm,
    ObjectiveConfig,
    RatParams,
    SamplePath,
    SolverOptions,
    VecmParams,
    assemble_matrix_form,
    closed_form_gamma_sigma,
    default_rat_params,
    fit,
    nmse,
    penalized_objective,
    projection_matrix,
    proximal_target,
    psi_bound,
    q_coefficients,
    rank_truncate,
    robust_weights,
    surrogate_quadratic,
    weighted_blocks,
)
from robustvecm.objective import (
    mahalanobis_sq,
    rat_majorizer_constant,
    rat_value,
)
from robustvecm.model import residuals
from robustvecm.solver import _projected_products


def test_weighted_blocks_identity_and_scaling(rng):
    mf = random_matrix_form(rng, k=2, n=5, p=2)
    dyb, ylagb, dxb = weighted_blocks(mf, np.ones(5))
    assert np.array_equal(dyb, mf.dy)
    assert np.array_equal(ylagb, mf.ylag)
    assert np.array_equal(dxb, mf.dx)
    dyb, ylagb, dxb = weighted_blocks(mf, np.full(5, 4.0))
    assert np.allclose(dyb, 2.0 * mf.dy)
    assert np.allclose(ylagb, 2.0 * mf.ylag)
    assert np.allclose(dxb, 2.0 * mf.dx)


def test_weighted_blocks_match_column_oracle(rng):
    mf = random_matrix_form(rng, k=3, n=7, p=2)
    w = rng.uniform(0.2, 3.0, size=7)
    dyb, ylagb, dxb = weighted_blocks(mf, w)
    for t in range(7):
        root = np.sqrt(w[t])
        assert np.allclose(dyb[:, t], mf.dy[:, t] * root)
        assert np.allclose(ylagb[:, t], mf.ylag[:, t] * root)
        assert np.allclose(dxb[:, t], mf.dx[:, t] * root)


def test_weighted_blocks_reject_nonpositive_weights(rng):
    from robustvecm import NumericalError

    mf = random_matrix_form(rng, k=2, n=4, p=1)
    with pytest.raises(NumericalError):
        weighted_blocks(mf, np.array([1.0, 0.0, 1.0, 1.0]))


def test_projection_matrix_ones_row_is_centering():
    m = projection_matrix(np.ones((1, 4)))
    assert np.allclose(m, np.eye(4) - np.full((4, 4), 0.25), atol=1e-14)


def test_projection_matrix_square_regressors_annihilate(rng):
    dxb = rng.standard_normal((4, 4)) + 2.0 * np.eye(4)
    m = projection_matrix(dxb)
    assert np.abs(m).max() < 1e-8


def test_projection_matrix_idempotent_and_annihilating(rng):
    dxb = np.vstack([rng.standard_normal((2, 12)), np.ones((1, 12))])
    m = projection_matrix(dxb)
    assert np.linalg.norm(m @ m - m) < 1e-8
    assert np.linalg.norm(m @ dxb.T) < 1e-8
    assert np.allclose(m, m.T, atol=1e-12)


def test_projection_matrix_rejects_collinear_rows(rng):
    row = rng.standard_normal((1, 8))
    dxb = np.vstack([row, 2.0 * row, np.ones((1, 8))])
    with pytest.raises(CollinearRegressorsError):
        projection_matrix(dxb)


def test_closed_form_recovers_exact_coefficients(rng):
    truth, mf = noise_free_instance(0, k=3, p=2, r=2, n=60, s=3)
    gamma, sigma = closed_form_gamma_sigma(truth.params.pi, mf.dy, mf.ylag, mf.dx)
    assert np.allclose(gamma, truth.params.gamma, atol=1e-8)
    # projected residuals vanish, so sigma is the floor bump only
    assert np.linalg.eigvalsh(sigma)[-1] < 1e-9


def test_closed_form_zero_dy_oracle(rng):
    mf = random_matrix_form(rng, k=2, n=8, p=2)
    pi = rng.standard_normal((2, 2)) * 0.5
    zeros = np.zeros_like(mf.dy)
    gamma, sigma = closed_form_gamma_sigma(pi, zeros, mf.ylag, mf.dx)
    gram_inv = np.linalg.inv(mf.dx @ mf.dx.T)
    gamma_expected = -pi @ mf.ylag @ mf.dx.T @ gram_inv
    m = projection_matrix(mf.dx)
    sigma_expected = pi @ mf.ylag @ m @ mf.ylag.T @ pi.T / mf.n
    assert np.allclose(gamma, gamma_expected, atol=1e-10)
    assert np.allclose(sigma, sigma_expected, atol=1e-8)


def test_closed_form_matches_least_squares_oracle(rng):
    mf = random_matrix_form(rng, k=3, n=20, p=2)
    pi = rng.standard_normal((3, 3)) * 0.4
    gamma, _ = closed_form_gamma_sigma(pi, mf.dy, mf.ylag, mf.dx)
    target = mf.dy - pi @ mf.ylag
    gamma_ls, *_ = np.linalg.lstsq(mf.dx.T, target.T, rcond=None)
    assert np.allclose(gamma, gamma_ls.T, atol=1e-8)


def test_q_coefficients_values():
    rp = RatParams(scale=1.0, eps=0.1)
    at_zero = q_coefficients(np.zeros((3, 3)), rp)
    expected = 1.0 / (0.1 * 1.1**2)
    assert np.allclose(at_zero, expected, rtol=1e-14)
    pi = np.zeros((3, 3))
    pi[0, 0] = 0.1  # column norm exactly eps clamps identically
    assert np.allclose(q_coefficients(pi, rp)[0], expected, rtol=1e-14)
    pi[0, 0] = 1.0
    assert np.isclose(q_coefficients(pi, rp)[0], 0.25, rtol=1e-14)


def _tiny_pieces(rng, k=2, n=6, p=1, xi=0.8):
    mf = random_matrix_form(rng, k=k, n=n, p=p)
    w = rng.uniform(0.5, 2.0, size=n)
    dyb, ylagb, dxb = weighted_blocks(mf, w)
    a_mat, cross = _projected_products(dyb, ylagb, dxb)
    sigma = random_spd(rng, k)
    rp = RatParams(scale=0.4, eps=1e-2)
    pi = rng.standard_normal((k, k)) * 0.6
    q = q_coefficients(pi, rp)
    return mf, (dyb, ylagb, dxb), a_mat, cross, sigma, q, pi, xi


def test_implicit_operator_matches_dense_kronecker(rng):
    _, _, a_mat, cross, sigma, q, pi, xi = _tiny_pieces(rng)
    k = pi.shape[0]
    apply_g, h = surrogate_quadratic(a_mat, sigma, xi, q, cross)
    sigma_inv = np.linalg.inv(sigma)
    g_dense = np.kron(a_mat, sigma_inv) + xi * np.kron(np.diag(q), np.eye(k))
    vec = pi.reshape(-1, order="F")
    expected = (g_dense @ vec).reshape(k, k, order="F")
    assert np.linalg.norm(apply_g(pi) - expected) < 1e-10
    assert np.linalg.norm(h - sigma_inv @ cross) < 1e-10


def test_implicit_operator_reductions(rng):
    k = 3
    pi = rng.standard_normal((k, k))
    a_mat = random_spd(rng, k)
    apply_g, _ = surrogate_quadratic(a_mat, np.eye(k), 0.0, np.zeros(k), np.zeros((k, k)))
    assert np.allclose(apply_g(pi), pi @ a_mat, atol=1e-12)
    apply_id, _ = surrogate_quadratic(np.eye(k), np.eye(k), 0.0, np.zeros(k), np.zeros((k, k)))
    assert np.allclose(apply_id(pi), pi, atol=1e-12)


def test_psi_bound_identity_and_scaling(rng):
    k = 2
    assert np.isclose(psi_bound(np.eye(k), np.eye(k), 0.0, np.zeros(k)), 1.0, rtol=1e-12)
    a_mat = random_spd(rng, k)
    base = psi_bound(a_mat, np.eye(k), 0.0, np.zeros(k))
    assert np.isclose(psi_bound(10.0 * a_mat, np.eye(k), 0.0, np.zeros(k)), 10.0 * base,
                      rtol=1e-12)


def test_psi_bound_dominates_dense_eigenvalue(rng):
    for _ in range(10):
        _, _, a_mat, cross, sigma, q, pi, xi = _tiny_pieces(rng)
        k = pi.shape[0]
        g_dense = np.kron(a_mat, np.linalg.inv(sigma)) + xi * np.kron(np.diag(q), np.eye(k))
        lam = np.linalg.eigvalsh(0.5 * (g_dense + g_dense.T))[-1]
        psi = psi_bound(a_mat, sigma, xi, q)
        assert psi >= lam - 1e-10 * abs(lam)


def test_proximal_target_stationary_point(rng):
    _, _, a_mat, _, sigma, q, pi, xi = _tiny_pieces(rng)
    apply_g, _ = surrogate_quadratic(a_mat, sigma, xi, q, np.zeros_like(pi))
    h = apply_g(pi)  # gradient of the quadratic model vanishes at pi
    psi = psi_bound(a_mat, sigma, xi, q)
    target = proximal_target(pi, a_mat, sigma, xi, q, h, psi)
    assert np.allclose(target, pi, atol=1e-12)


def test_proximal_target_vanishing_step(rng):
    _, _, a_mat, cross, sigma, q, pi, xi = _tiny_pieces(rng)
    _, h = surrogate_quadratic(a_mat, sigma, xi, q, cross)
    target = proximal_target(pi, a_mat, sigma, xi, q, h, 1e12)
    assert np.linalg.norm(target - pi) < 1e-9


def test_proximal_target_matches_dense_oracle(rng):
    _, _, a_mat, cross, sigma, q, pi, xi = _tiny_pieces(rng)
    k = pi.shape[0]
    sigma_inv = np.linalg.inv(sigma)
    g_dense = np.kron(a_mat, sigma_inv) + xi * np.kron(np.diag(q), np.eye(k))
    h = sigma_inv @ cross
    psi = psi_bound(a_mat, sigma, xi, q)
    vec = pi.reshape(-1, order="F")
    step = (g_dense @ vec - h.reshape(-1, order="F")) / psi
    expected = pi - step.reshape(k, k, order="F")
    target = proximal_target(pi, a_mat, sigma, xi, q, h, psi)
    assert np.linalg.norm(target - expected) < 1e-10


def test_rank_truncate_diagonal_case():
    out = rank_truncate(np.diag([3.0, 2.0, 1.0]), 2)
    assert np.allclose(out, np.diag([3.0, 2.0, 0.0]), atol=1e-12)


def test_rank_truncate_no_op_when_rank_sufficient(rng):
    mat = rank_truncate(rng.standard_normal((4, 4)), 2)
    again = rank_truncate(mat, 3)
    assert np.linalg.norm(again - mat) < 1e-10
    full = rng.standard_normal((3, 3))
    assert np.array_equal(rank_truncate(full, 3), full)


def test_rank_truncate_eckart_young(rng):
    mat = rng.standard_normal((5, 5))
    out = rank_truncate(mat, 3)
    u, s, vt = np.linalg.svd(mat)
    oracle = (u[:, :3] * s[:3]) @ vt[:3]
    assert np.linalg.norm(out - oracle) < 1e-10
    err = np.linalg.norm(mat - out) ** 2
    assert np.isclose(err, s[3] ** 2 + s[4] ** 2, rtol=1e-10)


def test_fit_exact_recovery_noise_free():
    truth, mf = noise_free_instance(2, k=3, p=2, r=2, n=80, s=3)
    cfg = ObjectiveConfig(rat=default_rat_params(3), xi=0.0, loss="cauchy")
    report = fit(mf, SolverOptions(rank=2, cfg=cfg, max_iter=200))
    assert nmse(report.params.pi, truth.params.pi) < 1e-6


def test_fit_single_iteration_trace_contract():
    truth, mf, _ = simulated_instance(3, k=3, p=1, r=1, n=50, s=2)
    cfg = ObjectiveConfig(rat=default_rat_params(3), xi=0.5, loss="cauchy")
    with pytest.raises(DimensionError):
        SolverOptions(rank=1, cfg=cfg, max_iter=0)
    report = fit(mf, SolverOptions(rank=1, cfg=cfg, max_iter=1))
    assert len(report.obj_trace) == 2
    assert report.iterations == 1
    assert report.terminated == "max_iter"


def test_fit_descent_and_state_invariants():
    truth, mf, _ = simulated_instance(4, k=4, p=2, r=2, n=300, s=3,
                                      innovation="student", df=3.0)
    cfg = ObjectiveConfig(rat=default_rat_params(4), xi=1.0, loss="cauchy")
    seen = []

    def watch(state):
        assert np.all(state.weights > 0)
        assert np.all(state.weights <= 1.0 + 4.0 + 1e-12)
        assert np.all(state.qvec > 0)
        assert state.psi > 0
        seen.append(state.iteration)

    report = fit(mf, SolverOptions(rank=2, cfg=cfg, max_iter=150), state_callback=watch)
    assert seen == list(range(1, report.iterations + 1))
    trace = report.obj_trace
    assert np.all(trace[1:] <= trace[:-1] + 1e-9 * np.abs(trace[:-1]) + 1e-12)
    s = np.linalg.svd(report.params.pi, compute_uv=False)
    assert s[2] <= 1e-8 * s[0]  # rank constraint honored
    assert np.linalg.eigvalsh(report.params.sigma)[0] > 0


def test_fit_descends_at_benchmark_scale():
    truth, mf, _ = simulated_instance(9, k=5, p=2, r=3, n=1000, s=4,
                                      innovation="student", df=3.0)
    from robustvecm import default_xi

    cfg = ObjectiveConfig(rat=default_rat_params(5), xi=default_xi(mf), loss="cauchy")
    report = fit(mf, SolverOptions(rank=3, cfg=cfg, max_iter=150))
    trace = report.obj_trace
    assert np.all(trace[1:] <= trace[:-1] + 1e-9 * np.abs(trace[:-1]) + 1e-12)
    assert trace[-1] <= trace[0]


def test_fit_rank_zero_keeps_pi_zero():
    truth, mf, _ = simulated_instance(5, k=3, p=1, r=1, n=60, s=2)
    cfg = ObjectiveConfig(rat=default_rat_params(3), xi=0.5, loss="cauchy")
    report = fit(mf, SolverOptions(rank=0, cfg=cfg, max_iter=50))
    assert np.all(report.params.pi == 0.0)
    assert report.factors.alpha.shape == (3, 0)
    assert np.linalg.eigvalsh(report.params.sigma)[0] > 0


def test_fit_rejects_collinear_regressors():
    # constant path makes every lagged-difference row zero alongside the drift row
    c = np.array([[1.0], [2.0]])
    path = SamplePath(presample=np.tile(c, (1, 2)), observations=np.tile(c, (1, 8)))
    mf = assemble_matrix_form(path, 2)
    cfg = ObjectiveConfig(rat=default_rat_params(2), xi=0.0, loss="cauchy")
    with pytest.raises(CollinearRegressorsError):
        fit(mf, SolverOptions(rank=1, cfg=cfg, max_iter=5, init="zero_pi"))


def _polish_fixed_point(pi0, mf, cfg, rank_decl, iters=400):
    """Drive (gamma, sigma) to the reweighted fixed point at fixed pi0."""
    gamma, sigma = closed_form_gamma_sigma(pi0, mf.dy, mf.ylag, mf.dx)
    params = VecmParams(k=mf.k, p=1, r=rank_decl, pi=pi0, gamma=gamma, sigma=sigma)
    for _ in range(iters):
        w = robust_weights(params, mf, loss=cfg.loss, df=cfg.df)
        dyb, ylagb, dxb = weighted_blocks(mf, w)
        gamma_new, sigma_new = closed_form_gamma_sigma(pi0, dyb, ylagb, dxb)
        move = np.linalg.norm(gamma_new - params.gamma) + np.linalg.norm(
            sigma_new - params.sigma
        )
        params = VecmParams(k=mf.k, p=1, r=rank_decl, pi=pi0,
                            gamma=gamma_new, sigma=sigma_new)
        if move < 1e-15:
            break
    assert move < 1e-12, "fixed-point polish did not converge"
    return params


def test_global_surrogate_dominates_profiled_objective(rng):
    """Constant-tracked sandwich on a tiny instance.

    With (gamma, sigma) at their reweighted fixed point given pi0, the final
    isotropic quadratic model plus its accumulated additive constants upper
    bounds the true penalized objective profiled over (gamma, sigma) at any
    probe Pi, and touches it at pi0.
    """
    k, n = 2, 8
    mf = random_matrix_form(rng, k=k, n=n, p=1)
    rp = RatParams(scale=0.4, eps=1e-2)
    cfg = ObjectiveConfig(rat=rp, xi=0.9, loss="cauchy")
    pi0 = rank_truncate(rng.standard_normal((k, k)) * 0.6, 1)
    theta = _polish_fixed_point(pi0, mf, cfg, rank_decl=1)

    w = robust_weights(theta, mf, loss="cauchy")
    dyb, ylagb, dxb = weighted_blocks(mf, w)
    a_mat, cross = _projected_products(dyb, ylagb, dxb)
    q = q_coefficients(pi0, rp)
    apply_g, h = surrogate_quadratic(a_mat, theta.sigma, cfg.xi, q, cross)
    psi = psi_bound(a_mat, theta.sigma, cfg.xi, q)
    target = proximal_target(pi0, a_mat, theta.sigma, cfg.xi, q, h, psi)

    # accumulated constants of the majorizer chain
    delta = mahalanobis_sq(residuals(theta, mf), theta.sigma)
    c_loss = 0.5 * (1.0 + k)
    c1 = c_loss * float(np.sum(np.log1p(delta) - delta / (1.0 + delta)))
    c2 = 0.5 * n * float(np.linalg.slogdet(theta.sigma)[1])
    m_dense = projection_matrix(dxb)
    c3 = 0.5 * float(np.trace(np.linalg.solve(theta.sigma, dyb @ m_dense @ dyb.T)))
    norms0 = np.linalg.norm(pi0, axis=0)
    c4 = cfg.xi * float(np.sum(rat_majorizer_constant(norms0, rp)))

    def quad_model(pi):
        return 0.5 * float(np.sum(pi * apply_g(pi))) - float(np.sum(h * pi))

    c5 = quad_model(pi0) - 0.5 * psi * float(np.sum((pi0 - target) ** 2))

    def upper(pi):
        return 0.5 * psi * float(np.sum((pi - target) ** 2)) + c5 + c1 + c2 + c3 + c4

    def profiled_objective(pi):
        gamma, sigma = closed_form_gamma_sigma(pi, dyb, ylagb, dxb)
        trial = VecmParams(k=k, p=1, r=k, pi=pi, gamma=gamma, sigma=sigma)
        return penalized_objective(trial, mf, cfg)

    f0 = profiled_objective(pi0)
    assert abs(upper(pi0) - f0) <= 1e-7 * max(1.0, abs(f0))
    for scale in (0.05, 0.3, 1.0, 2.0):
        for _ in range(5):
            probe = pi0 + scale * rng.standard_normal((k, k))
            gap = upper(probe) - profiled_objective(probe)
            assert gap >= -1e-8 * max(1.0, abs(f0))


@pytest.mark.parametrize("expand", [0.3, 1.0, 2.5])
def test_penalty_quadratic_majorizer_sandwich(expand):
    rp = RatParams(scale=0.7, eps=5e-2)
    from robustvecm.objective import rat_curvature

    q = rat_curvature(expand, rp)
    c = rat_majorizer_constant(expand, rp)
    xs = np.linspace(-6.0, 6.0, 2001)
    bound = 0.5 * q * xs**2 + c
    assert np.all(rat_value(xs, rp) <= bound + 1e-12)
    assert abs(rat_value(expand, rp) - (0.5 * q * expand**2 + c)) < 1e-10
