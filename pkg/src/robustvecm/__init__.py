"""Robust sparse reduced-rank estimation of vector error correction models.

A numpy/scipy library for fitting cointegrated systems under heavy-tailed
innovations: an elliptical Cauchy (or Student-t) loss, column-wise group
sparsity on the long-run matrix through a smoothed rational penalty, a rank
constraint handled by truncated SVD, and a monotone majorize-minimize
solver, plus the simulator and Monte Carlo harness used to benchmark it.
"""

from .baselines import GdOptions, fit_gd, fit_with_loss
from .errors import (
    CollinearRegressorsError,
    DataError,
    DimensionError,
    GenerationError,
    NumericalError,
    RankViolationError,
    RobustVecmError,
    SimulationOverflowError,
)
from .experiments import (
    BenchSpec,
    NmseRow,
    NmseTable,
    RepResult,
    default_xi,
    iterations_to_level,
    nmse,
    run_convergence,
    run_nmse_sweep,
)
from .model import (
    CointFactors,
    MatrixForm,
    SamplePath,
    VecmParams,
    assemble_matrix_form,
    companion_matrix,
    factorize_pi,
    residuals,
)
from .objective import (
    ObjectiveConfig,
    RatParams,
    cauchy_loss,
    default_rat_params,
    group_regularizer,
    loss_value,
    mahalanobis_sq,
    objective_gradients,
    penalized_objective,
    rat_curvature,
    rat_value,
    robust_weights,
)
from .simulate import (
    DgpSpec,
    GroundTruth,
    check_stability,
    draw_innovations,
    make_ground_truth,
    propagate,
    simulate_dataset,
    simulate_path,
    stability_moduli,
)
from .solver import (
    FitReport,
    SolverOptions,
    SolverState,
    closed_form_gamma_sigma,
    fit,
    projection_matrix,
    proximal_target,
    psi_bound,
    q_coefficients,
    rank_truncate,
    surrogate_quadratic,
    warm_start_params,
    weighted_blocks,
    zero_pi_params,
)

__version__ = "0.1.0"
