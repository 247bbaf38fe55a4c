"""Capacity bounds for the relay channel whose state is known only at the relay."""

from .dm import (
    DiscreteChannelSpec,
    LowerFactorization,
    SpecError,
    UpperFactorization,
    build_joint_lower,
    build_joint_upper,
    dm_lower_eval,
    dm_search,
    dm_trivial_upper_eval,
    dm_upper_eval,
    is_degraded,
)
from .gaussian import (
    ChannelParams,
    ExtremeCase,
    LowerParams,
    UpperParams,
    alpha_opt,
    capacity_condition_threshold,
    capacity_known,
    degraded_df_capacity,
    extreme_cases,
    lower_bound,
    lower_term1,
    lower_term2,
    trivial_lower_bound,
    trivial_upper_bound,
    upper_bound,
    upper_bound_degraded_equiv,
    upper_term1_degraded,
    upper_term1_general,
    upper_term2,
)
from .information import JointPmf, entropy, mutual_information
from .optimize import BoundResult, GridSpec, InfeasibleError, NonFiniteObjectiveError, maximin, maximize
from .sweep import SweepRow, SweepSpec, run_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
