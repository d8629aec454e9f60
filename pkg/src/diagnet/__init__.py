"""Gradient-descent trajectories of deep diagonal linear networks on
separable data, with certified max-margin solvers and regime diagnostics."""

from .data import (
    DataError,
    DataStats,
    Dataset,
    NonSeparableError,
    bundled_dataset,
    compute_stats,
    load_dataset,
    make_dataset,
    random_uniform_dataset,
    sparse_random_dataset,
)
# the smoothed-margin evaluator dynamics.margins stays namespaced to avoid
# shadowing the margins solver module
from .dynamics import (
    BudgetExhaustedError,
    NetParams,
    StepperConfig,
    TrajectoryRecord,
    closed_form_residual,
    init_params,
    kernel_distance,
    linearized_flow_step,
    loss_gradient,
    normalized_direction,
    predictor,
    run,
    run_linearized,
    step,
    support_vectors,
    tangent_kernel,
)
from .estimator import DiagonalNetClassifier
from .margins import (
    KKTResiduals,
    MarginSolution,
    SolverError,
    is_separable,
    kkt_check,
    l1_max_margin,
    l2_max_margin,
    lp_quasi_stationary,
    q_mu_max_margin,
    q_path,
)
from .penalty import (
    PenaltySpec,
    h_derivative,
    h_inverse,
    h_value,
    penalty_gradient,
    penalty_hessian_diag,
    penalty_value,
    q_derivative,
    q_second_derivative,
    q_value,
    q_value_quadrature,
)
from .regimes import (
    ConditionReport,
    StoppingRule,
    SweepResult,
    SweepSpec,
    accuracy_vs_init_fit,
    angle_degrees,
    condition1_check,
    default_condition_window,
    excess_norms,
    first_metric_exceed,
    margin_rescale,
    run_sweep,
    schedule_target,
    sphere_coords,
    suggest_eta,
    threshold_gamma_tilde,
)

__version__ = "0.1.0"
