"""Online SGD with Polyak-Ruppert averaging, explicit L2 error bounds, and Monte-Carlo checks of those bounds."""

from .algorithms import EstimatorState, StepSchedule, averaged_update, initial_state, sgd_step, step_size
from .bounds import (
    BoundCurve,
    DerivedConstants,
    bound_curve,
    derive_constants,
    lemma1_bound,
    lemma2_bound,
    series_upper_bound,
    theorem1_bound,
    theorem2_bound,
    theorem3_bound,
    theorem4_bound,
    theorem5_bound,
    theorem6_bound,
    thresholds,
)
from .problems import AssumptionConstants, constants_for, suboptimality
from .verify import ErrorCurves, DominanceReport, cramer_rao_ratio, dominance_check, fit_rate, run_replicates

__version__ = "0.1.0"
