"""Penalized polynomial regression on marker data and coding-translation checks."""

__version__ = "0.1.0"

from .coding import (
    DesignMatrix,
    apply_translation,
    as_marker_matrix,
    build_design_matrix,
    column_mean_translation,
)
from .invariance import (
    InvarianceReport,
    Proposition1Report,
    SuiteSummary,
    Verdict,
    check_proposition1,
    corollary_suite,
    run_invariance_experiment,
)
from .polynomial import (
    INTERCEPT,
    Monomial,
    PolynomialCoefficients,
    PolynomialModel,
    complete_closure,
    completeness_check,
    evaluate_polynomial,
    full_model,
    parse_model,
    total_degree,
    translate_polynomial,
)
from .solvers import (
    FitResult,
    NonConvergence,
    Norm,
    PenaltySpec,
    RankDeficient,
    TooLarge,
    fit,
    fit_lasso_weighted,
    fit_ols,
    fit_ridge_weighted,
    lasso_oracle_small,
    predict,
)
