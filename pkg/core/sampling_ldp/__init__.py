"""Graph samplers, exact event oracles and large-deviation experiments."""

from .exact import event_log_prob_exact, event_range, kl_product, kl_product_bruteforce, lattice, sum_distribution
from .samplers import conditional_sample, sample_from_graphon, sample_graph, sample_sized
from .verifier import LdpVerifier, concentration_experiment, event_constraints, verify_ldp

__all__ = [
    "LdpVerifier",
    "concentration_experiment",
    "conditional_sample",
    "event_constraints",
    "event_log_prob_exact",
    "event_range",
    "kl_product",
    "kl_product_bruteforce",
    "lattice",
    "sample_from_graphon",
    "sample_graph",
    "sample_sized",
    "sum_distribution",
    "verify_ldp",
]
