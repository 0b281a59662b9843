"""Double-precision evaluation of the identity under several strategies.

The alternating left side loses accuracy in proportion to its cancellation
index; the product and symmetric-polynomial forms only touch nonnegative
quantities when theta > 0 and stay accurate. Errors are measured against
the exact values from :mod:`altbinom.exact`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from altbinom import exact
from altbinom.exact import IdentityInstance, InvalidInstanceError, format_rational

MAX_N = 1000


class EvalStrategy(enum.Enum):
    NAIVE_SUM = "naive"
    COMPENSATED_SUM = "compensated"
    PAIRWISE_SUM = "pairwise"
    PRODUCT_FORM = "product"
    SYMMETRIC_DP = "symdp"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "EvalStrategy":
        key = text.strip().lower()
        for s in cls:
            if key in (s.value, s.label.lower()):
                return s
        raise ValueError(
            f"unknown strategy {text!r}; choose from {', '.join(s.value for s in cls)}"
        )


_LABELS = {
    EvalStrategy.NAIVE_SUM: "NaiveSum",
    EvalStrategy.COMPENSATED_SUM: "CompensatedSum",
    EvalStrategy.PAIRWISE_SUM: "PairwiseSum",
    EvalStrategy.PRODUCT_FORM: "ProductForm",
    EvalStrategy.SYMMETRIC_DP: "SymmetricDP",
}
_ORDER = {s: i for i, s in enumerate(EvalStrategy)}
SUM_STRATEGIES = (
    EvalStrategy.NAIVE_SUM,
    EvalStrategy.COMPENSATED_SUM,
    EvalStrategy.PAIRWISE_SUM,
)


@dataclass(frozen=True)
class FloatEvalResult:
    strategy: EvalStrategy
    value: float
    abs_error: float
    rel_error: float
    cancellation_index: float

    def csv_fields(self) -> List[str]:
        return [
            self.strategy.label,
            format(self.value, ".17g"),
            format(self.abs_error, ".5e"),
            format(self.rel_error, ".5e"),
            format(self.cancellation_index, ".5e"),
        ]


def applicable_strategies(inst: IdentityInstance) -> List[EvalStrategy]:
    """Sum strategies, then ProductForm when m == 1 or SymmetricDP otherwise."""
    closed = EvalStrategy.PRODUCT_FORM if inst.m == 1 else EvalStrategy.SYMMETRIC_DP
    return [*SUM_STRATEGIES, closed]


def _check(inst: IdentityInstance) -> None:
    if inst.theta <= 0:
        raise InvalidInstanceError(
            f"floating-point evaluation needs theta > 0, got {format_rational(inst.theta)}"
        )
    if inst.n > MAX_N:
        raise InvalidInstanceError(
            f"n={inst.n} exceeds the floating-point cap of {MAX_N} "
            "(binomial coefficients would overflow)"
        )


def _terms(n: int, m: int, theta: float) -> List[float]:
    # binomials by running ratio, kept in floats on purpose
    terms = []
    c = 1.0
    for k in range(n + 1):
        x = theta / (theta + k)
        t = c * x**m
        terms.append(-t if k & 1 else t)
        c *= (n - k) / (k + 1)
    return terms


def naive_sum(xs: Sequence[float]) -> float:
    s = 0.0
    for x in xs:
        s += x
    return s


def compensated_sum(xs: Sequence[float]) -> float:
    """Kahan-Babuska (Neumaier) summation."""
    s = 0.0
    comp = 0.0
    for x in xs:
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
    return s + comp


def pairwise_sum(xs: Sequence[float]) -> float:
    if not xs:
        return 0.0
    if len(xs) == 1:
        return xs[0]
    mid = len(xs) // 2
    return pairwise_sum(xs[:mid]) + pairwise_sum(xs[mid:])


def product_form(n: int, theta: float) -> float:
    p = 1.0
    for k in range(1, n + 1):
        p *= k / (theta + k)
    return p


def symmetric_dp(n: int, m: int, theta: float) -> float:
    xs = [theta / (theta + k) for k in range(1, n + 1)]
    row = [1.0] * (n + 1)
    tail = 0.0
    for _ in range(1, m):
        nxt = [0.0] * (n + 1)
        for k in range(1, n + 1):
            nxt[k] = nxt[k - 1] + xs[k - 1] * row[k]
        row = nxt
        tail += row[n]
    return product_form(n, theta) * (1.0 + tail)


def _to_float(x: Fraction) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def cancellation_index(inst: IdentityInstance) -> Fraction:
    """Sum of |terms| of the alternating side divided by its value."""
    if inst.theta <= 0:
        raise InvalidInstanceError("cancellation index is defined for theta > 0 only")
    n, m, theta = inst.n, inst.m, inst.theta
    absolute = sum(
        (exact.binomial(n, k) * (theta / (theta + k)) ** m for k in range(n + 1)),
        Fraction(0),
    )
    return absolute / exact.lhs_alternating_sum(inst)


def _raw_value(inst: IdentityInstance, strategy: EvalStrategy) -> float:
    theta = float(inst.theta)
    if strategy in SUM_STRATEGIES:
        terms = _terms(inst.n, inst.m, theta)
        if strategy is EvalStrategy.NAIVE_SUM:
            return naive_sum(terms)
        if strategy is EvalStrategy.COMPENSATED_SUM:
            return compensated_sum(terms)
        return pairwise_sum(terms)
    if strategy is EvalStrategy.PRODUCT_FORM:
        if inst.m != 1:
            raise InvalidInstanceError("ProductForm evaluates the m = 1 identity only")
        return product_form(inst.n, theta)
    return symmetric_dp(inst.n, inst.m, theta)


def eval_float(
    inst: IdentityInstance,
    strategy: EvalStrategy,
    *,
    oracle: Optional[Fraction] = None,
    index: Optional[Fraction] = None,
) -> FloatEvalResult:
    """Evaluate ``inst`` in doubles with ``strategy`` and score it.

    ``oracle`` and ``index`` may be passed in to avoid recomputing the exact
    value and cancellation index across strategies.
    """
    _check(inst)
    if oracle is None:
        oracle = exact.rhs_general(inst)
    if index is None:
        index = cancellation_index(inst)
    value = _raw_value(inst, strategy)
    if math.isfinite(value):
        diff = abs(Fraction(value) - oracle)
        abs_err = _to_float(diff)
        rel_err = _to_float(diff / abs(oracle))
    else:
        abs_err = rel_err = math.inf
    return FloatEvalResult(strategy, value, abs_err, rel_err, _to_float(index))


def error_report(
    inst: IdentityInstance, strategies: Optional[Sequence[EvalStrategy]] = None
) -> List[FloatEvalResult]:
    """One result per applicable strategy, ordered by strategy tag.

    If ``strategies`` is given, strategies not applicable to ``inst`` are
    dropped rather than raising.
    """
    _check(inst)
    usable = applicable_strategies(inst)
    if inst.m == 1:
        usable.append(EvalStrategy.SYMMETRIC_DP)
    if strategies is None:
        chosen = applicable_strategies(inst)
    else:
        chosen = [s for s in set(strategies) if s in usable]
    chosen.sort(key=_ORDER.__getitem__)
    oracle = exact.rhs_general(inst)
    index = cancellation_index(inst)
    return [eval_float(inst, s, oracle=oracle, index=index) for s in chosen]
