"""Numerical laboratory for the weakly self-avoiding walk on Z^d.

Certified (enclosure-based) truncated walk sums, exact lam=0 oracles,
derived observables, and machine checks of the model's structural
inequalities.
"""

from .enclosure import Enclosure
from .enumeration import (bubble_truncated, chi_truncated, green, green_row,
                          phi)
from .lattice import (Block, Box, Explicit, HalfSpace, Intersection, Point,
                      PositiveBox, exit_edges, full_box, neighbors, singleton)
from .mcsampler import McEstimate, estimate_green_mc
from .observables import (ErrorAmplitudeResult, SharpLengthResult,
                          correlation_length_estimate, error_amplitude,
                          halfspace_avg_lower_check, sharp_length,
                          sharp_length_eps)
from .srw import (GreenTable, RandomSource, coupling_merge_stats,
                  exit_time_mean, gambler_ruin_truncated, green_exact,
                  green_exact_column, halfspace_visits)
from .verifier import (VerdictReport, check_bootstrap_conditions,
                       check_iterated_decay, check_simon_lieb_reversed,
                       check_simon_lieb_upper, check_weight_sandwich,
                       measure_harnack_ratio)
from .walks import (ModelParams, Walk, concat, extend_factor, rho,
                    split_weight_bounds)

__version__ = "0.1.0"

__all__ = [
    "Enclosure", "Point", "Box", "HalfSpace", "PositiveBox", "Block",
    "Explicit", "Intersection", "full_box", "singleton", "neighbors",
    "exit_edges", "ModelParams", "Walk", "rho", "extend_factor", "concat",
    "split_weight_bounds", "green", "green_row", "phi", "chi_truncated",
    "bubble_truncated", "sharp_length", "sharp_length_eps",
    "correlation_length_estimate", "error_amplitude",
    "halfspace_avg_lower_check", "SharpLengthResult", "ErrorAmplitudeResult",
    "RandomSource", "GreenTable", "green_exact", "green_exact_column",
    "gambler_ruin_truncated", "halfspace_visits", "coupling_merge_stats",
    "exit_time_mean", "VerdictReport", "check_simon_lieb_upper",
    "check_simon_lieb_reversed", "check_weight_sandwich",
    "check_bootstrap_conditions", "check_iterated_decay",
    "measure_harnack_ratio", "McEstimate", "estimate_green_mc",
]
