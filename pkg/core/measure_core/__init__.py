"""Finite weight spaces, measures and the Levy-Prokhorov metric."""

from .measures import (
    BINARY_SPACE,
    as_function,
    bernoulli,
    check_same_space,
    dirac,
    discrete_space,
    kl_divergence,
    kl_rows,
    log_mgf,
    measure_mean,
    real_line_space,
    tilt,
    tilted_mean,
)
from .prokhorov import (
    distance_levels,
    lp_distance,
    lp_distance_batch,
    lp_distance_bruteforce,
    lp_feasible,
    lp_feasible_bruteforce,
    transport_deficits,
)

__all__ = [
    "BINARY_SPACE",
    "as_function",
    "bernoulli",
    "check_same_space",
    "dirac",
    "discrete_space",
    "kl_divergence",
    "kl_rows",
    "log_mgf",
    "measure_mean",
    "real_line_space",
    "tilt",
    "tilted_mean",
    "distance_levels",
    "lp_distance",
    "lp_distance_batch",
    "lp_distance_bruteforce",
    "lp_feasible",
    "lp_feasible_bruteforce",
    "transport_deficits",
]
