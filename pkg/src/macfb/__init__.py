"""Achievable rate regions for the two-user multiple-access channel with feedback."""

from macfb.errors import (
    ConsistencyError,
    DimensionError,
    InfeasibleError,
    MacfbError,
    SingularSystemError,
)
from macfb.prob import (
    CondTable,
    ExtendedInputLaw,
    InputLaw,
    JointTable,
    VariableSpec,
    binary_entropy,
    build_single_block,
    build_two_block,
    build_two_block_extended,
    cond_entropy,
    cond_mutual_info,
    marginalize,
)
from macfb.consistency import (
    ExtendedFeedbackLaw,
    FeedbackLaw,
    GaussianGains,
    check_consistency,
    check_consistency_extended,
    solve_binary_xy,
    solve_gaussian_gains,
)
from macfb.regions import (
    RateConstraintSet,
    RatePoint,
    boundary_trace,
    contains,
    cover_leung_region,
    equal_rate_point,
    nofeedback_pentagon,
    theorem1_region_3form,
    theorem1_region_5form,
    theorem2_region,
)

__version__ = "0.1.0"
