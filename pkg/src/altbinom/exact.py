"""Exact rational evaluation of both sides of the identity family.

Everything here works over :class:`fractions.Fraction`, which keeps values
in lowest terms after every operation. These functions are the oracle the
floating-point and Monte Carlo modules are checked against.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

_RATIONAL_RE = re.compile(r"\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class InvalidInstanceError(ValueError):
    """Parameters outside the domain of the identity."""


class PoleError(InvalidInstanceError):
    """theta + k == 0 for some 0 <= k <= n."""


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``. Decimal and exponent forms are rejected.

    >>> parse_rational("-7/2")
    Fraction(-7, 2)
    """
    match = _RATIONAL_RE.match(text)
    if match is None:
        raise ValueError(
            f"not a rational literal: {text!r} (use an integer or p/q; "
            "decimals are rejected because they do not denote an exact value)"
        )
    num, den = match.groups()
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def as_rational(x: RationalLike) -> Fraction:
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("theta must be exact (int, Fraction or 'p/q' string), not float")
    return Fraction(x)


def check_no_pole(n: int, theta: Fraction) -> None:
    if theta.denominator == 1 and -n <= theta.numerator <= 0:
        raise PoleError(
            f"theta={format_rational(theta)} is a pole for n={n}: "
            f"theta + {-theta.numerator} = 0"
        )


@dataclass(frozen=True)
class IdentityInstance:
    """One member (n, m, theta) of the identity family."""

    n: int
    m: int
    theta: Fraction

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 0:
            raise InvalidInstanceError(f"n must be a nonnegative integer, got {self.n!r}")
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise InvalidInstanceError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "theta", as_rational(self.theta))
        check_no_pole(self.n, self.theta)

    def __str__(self) -> str:
        return f"(n={self.n}, m={self.m}, theta={format_rational(self.theta)})"


def binomial(n: int, k: int) -> int:
    """C(n, k), zero when k > n."""
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be nonnegative")
    return math.comb(n, k)


def _scaled_ratios(n: int, theta: Fraction) -> Tuple[int, List[int]]:
    """Return (L, [y_0..y_n]) with theta/(theta+k) == y_k / L exactly.

    With theta = p/q, theta/(theta+k) = p/(p+kq); L is the lcm of the p+kq,
    so the whole evaluation can stay in integers until one final reduction.
    """
    p, q = theta.numerator, theta.denominator
    dens = [p + k * q for k in range(n + 1)]
    lcm = math.lcm(*dens)
    return lcm, [p * (lcm // d) for d in dens]


def lhs_alternating_sum(inst: IdentityInstance) -> Fraction:
    """sum_{k=0}^{n} C(n,k) (-1)^k (theta/(theta+k))^m, starting at k = 0."""
    n, m = inst.n, inst.m
    lcm, ys = _scaled_ratios(n, inst.theta)
    total = 0
    c = 1
    for k, y in enumerate(ys):
        total += -c * y**m if k & 1 else c * y**m
        c = c * (n - k) // (k + 1)
    return Fraction(total, lcm**m)


def rhs_product(n: int, theta: RationalLike) -> Fraction:
    """prod_{k=1}^{n} k/(theta+k); 1 for n = 0."""
    theta = as_rational(theta)
    check_no_pole(n, theta)
    p, q = theta.numerator, theta.denominator
    den = math.prod(p + k * q for k in range(1, n + 1))
    return Fraction(math.factorial(n) * q**n, den)


def h_complete_table(jmax: int, n: int, theta: RationalLike) -> List[Fraction]:
    """[h_0, h_1, ..., h_jmax] of x_1..x_n with x_k = theta/(theta+k).

    Runs H[j][k] = H[j][k-1] + x_k H[j-1][k] one j-row at a time, on the
    integer numerators y_k = x_k L, so row j carries an implicit 1/L^j.
    """
    theta = as_rational(theta)
    check_no_pole(n, theta)
    lcm, ys = _scaled_ratios(n, theta)
    row = [1] * (n + 1)
    out = [Fraction(1)]
    for j in range(1, jmax + 1):
        nxt = [0] * (n + 1)
        for k in range(1, n + 1):
            nxt[k] = nxt[k - 1] + ys[k] * row[k]
        row = nxt
        out.append(Fraction(row[n], lcm**j))
    return out


def h_complete(j: int, n: int, theta: RationalLike) -> Fraction:
    """Sum over 1 <= k_1 <= ... <= k_j <= n of theta^j / prod_i (theta + k_i)."""
    if j < 0 or n < 0:
        raise ValueError("j and n must be nonnegative")
    return h_complete_table(j, n, theta)[j]


def rhs_general(inst: IdentityInstance) -> Fraction:
    hs = h_complete_table(inst.m - 1, inst.n, inst.theta)
    return rhs_product(inst.n, inst.theta) * (1 + sum(hs[1:], Fraction(0)))


def verify(inst: IdentityInstance) -> bool:
    return lhs_alternating_sum(inst) == rhs_general(inst)
