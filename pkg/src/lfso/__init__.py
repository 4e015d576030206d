"""Gradient descent with stepsizes from a local first-order smoothness
oracle, concrete oracle constructors for structured problem families, and
an executable verification suite."""

from .core import (GradientOracle, IterationRecord, Lfso, RPolicy, RunTrace,
                   SolverConfig, Termination, Vector, as_vector,
                   compute_r_tilde, euclidean_norm, lfso_step, run_fixed_gd,
                   run_lfso_gd)
from .errors import (AssumptionUnmetError, AssumptionWarning, GridEmptyError,
                     InsufficientDataError, LfsoError, MissingDiagnosticsError,
                     NegativeCurvatureError, NoConvergenceWarning,
                     NonFiniteValueError, ShapeMismatchError, ZeroOracleError,
                     ZeroResidualError)
from .oracles import (ConstantLfsoParams, HessianLipschitzLfsoParams,
                      composition_lfso, constant_lfso, hessian_lipschitz_lfso,
                      lp_regression_lfso, majorize_monotone)
from .problems import (CompositionProblem, LpRegressionProblem,
                       QuarticProblem, condition_number, load_regression_data,
                       make_lp_regression, make_norm_power,
                       regression_constants, residual_iterate, spectral_norm)
from .verify import (CheckReport, RateFit, SampleSpec, check_composition_run,
                     check_holder, check_lfso_validity, check_monotone_in_R,
                     check_quartic_threshold, check_regression_qlinear,
                     check_trace, classify_rate, fit_linear_rate,
                     fit_powerlaw_rate, quartic_containment_threshold)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
