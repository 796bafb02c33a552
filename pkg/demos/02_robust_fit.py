"""Fit the robust estimator and compare it with the Gaussian-loss variant.

Simulates one heavy-tailed dataset, fits the rank-constrained group-sparse
model once with the Cauchy loss and once with the Gaussian loss, and
compares estimation error, recovered cointegration factors, and how well
each estimate zeroes the truly inactive column.
"""

import numpy as np

from robustvecm import (
    DgpSpec,
    ObjectiveConfig,
    SolverOptions,
    assemble_matrix_form,
    default_rat_params,
    default_xi,
    fit_with_loss,
    make_ground_truth,
    nmse,
    simulate_path,
)

spec = DgpSpec(k=5, p=2, r=3, n=1000, active_columns=4,
               innovation="student", df=3.0, seed=7)
truth = make_ground_truth(spec)
path = simulate_path(truth, spec)
mf = assemble_matrix_form(path, spec.p)

xi = default_xi(mf)
print(f"penalty weight from the data: xi = {xi:.2f}")

reports = {}
for loss in ("cauchy", "gaussian"):
    cfg = ObjectiveConfig(rat=default_rat_params(spec.k), xi=xi, loss=loss)
    reports[loss] = fit_with_loss(mf, SolverOptions(rank=spec.r, cfg=cfg))

inactive = [j for j in range(spec.k) if j not in truth.support]
print(f"\ntruth: support {truth.support}, inactive column {inactive}")
for loss, report in reports.items():
    err = nmse(report.params.pi, truth.params.pi)
    norms = np.linalg.norm(report.params.pi, axis=0)
    print(f"\n{loss} loss ({report.terminated} after {report.iterations} iterations)")
    print(f"  NMSE: {err:.4f}")
    print(f"  estimated column norms: {np.round(norms, 3)}")
    print(f"  inactive-column norm: {norms[inactive[0]]:.4f}")

# the recovered factors reproduce the estimated long-run matrix
factors = reports["cauchy"].factors
recon = np.linalg.norm(factors.alpha @ factors.beta.T - reports["cauchy"].params.pi)
print(f"\nfactor reconstruction error (cauchy fit): {recon:.2e}")
print("orthonormality of the cointegration basis:",
      np.allclose(factors.beta.T @ factors.beta, np.eye(spec.r), atol=1e-10))
