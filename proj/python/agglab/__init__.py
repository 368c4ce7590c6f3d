"""Python access to the agglab C++ core."""

from ._core import (
    bounds,
    closed_form_value,
    continuous_minimax,
    discrete_minimax,
    intersection_set,
    large_d_bound,
    miss_probability,
    optimal_difference_rule,
    query_budget,
    randomized_difference_error,
    regime,
    verify,
)

__all__ = [
    "bounds",
    "closed_form_value",
    "continuous_minimax",
    "discrete_minimax",
    "intersection_set",
    "large_d_bound",
    "miss_probability",
    "optimal_difference_rule",
    "query_budget",
    "randomized_difference_error",
    "regime",
    "verify",
]
