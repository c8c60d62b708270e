"""Semiconvex sparsity penalties built from piecewise quadratic base functions."""
from .penalty import (
    ABS,
    ELASTIC_NET,
    RELU,
    Interval,
    PenaltySpec,
    QuadCoeffs,
    RejectedCoeffs,
    box_abs,
    eval_f,
    eval_l0,
    indicator,
    load_spec,
    spec_from_dict,
    spec_to_dict,
    subdiff_at_zero,
    validate,
)
from .moreau import env, eval_falpha, falpha_values, prox_base, prox_restricted
from .prox import (
    CaseTag,
    DimensionMismatch,
    ProxResult,
    ZeroSet,
    prox_hard,
    prox_select_values,
    prox_semiconvex,
    prox_separable,
    sparsity_threshold,
    switch_point,
)
from .oracle import GridSpec, grid_env, grid_prox, second_difference_min, zero_set_scan
from .solver import (
    RegressionProblem,
    SolveConfig,
    SolveReport,
    StepTooLarge,
    make_synthetic,
    solve,
)

__version__ = "0.1.0"
