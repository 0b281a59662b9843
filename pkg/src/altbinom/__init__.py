"""Exact, floating-point and Monte Carlo evaluation of the alternating binomial
identity family

    sum_k C(n,k) (-1)^k (theta/(theta+k))^m
        = prod_k k/(theta+k) * (1 + sum_{j<m} h_j(x_1..x_n)),  x_k = theta/(theta+k).
"""

from altbinom.exact import (
    IdentityInstance,
    InvalidInstanceError,
    PoleError,
    binomial,
    format_rational,
    h_complete,
    lhs_alternating_sum,
    parse_rational,
    rhs_general,
    rhs_product,
    verify,
)

__all__ = [
    "IdentityInstance",
    "InvalidInstanceError",
    "PoleError",
    "binomial",
    "format_rational",
    "h_complete",
    "lhs_alternating_sum",
    "parse_rational",
    "rhs_general",
    "rhs_product",
    "verify",
]

__version__ = "0.1.0"
