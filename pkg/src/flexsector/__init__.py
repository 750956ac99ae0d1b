"""Flexible-sector base station planning.

Antennas sit on a circular track and can be moved between sectors; all
sectors share one rotation. Given the expected number of users in each
angular zone, the library picks the rotation and per-sector antenna counts
that maximize the ZF uplink sum rate, and provides the closed-form analysis
and Monte-Carlo checks that go with it.
"""

__version__ = "0.1.0"

from .errors import DomainError, FlexSectorError, InfeasibleError, NumericalError, SingularChannelError
from .geometry import (CellConfig, SectorView, UserRealization, ZoneProfile, build_sector_view,
                       sample_users, users_per_sector)
from .rates import RateReport, max_min_rate, min_antennas, rate_lower, rate_upper, total_sum_rate
from .channel import McEstimate, antenna_gain, mc_ergodic_rate, per_user_snr, zf_combiners
from .allocation import (ContinuousAllocation, IntegerAllocation, bisect_nu, exhaustive_alloc,
                         round_allocation, solve_continuous)
from .planner import Plan, optimize_flexible, plan_alloc_only, plan_fixed, plan_rotation_only
from .analysis import (ExtremalResult, RegimeInfo, closed_form_allocation, extremal_distributions,
                       regime_threshold, sector_split_compare, sum_rate_interior, theorem1_gap)
from .scenarios import Scenario, scenario_distribution_I, scenario_distribution_II
from .experiments import SweepResult, sweep_antennas, sweep_rotation, validate_bounds
