"""Built-in check suites behind ``altbinom selftest``.

Each suite returns a list of failure messages; an empty list is a pass.
Functions are looked up through their modules at call time, so a patched
module is what gets checked.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Callable, List, NamedTuple, Optional, TextIO

from altbinom import exact, floateval, mc
from altbinom.exact import IdentityInstance
from altbinom.floateval import EvalStrategy

Suite = Callable[..., List[str]]


class SuiteResult(NamedTuple):
    name: str
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures


def h_enumerate(j: int, n: int, theta: Fraction) -> Fraction:
    """h_j by enumerating every non-decreasing j-tuple; exponential in j."""
    total = Fraction(0)
    for tup in itertools.combinations_with_replacement(range(1, n + 1), j):
        term = Fraction(1)
        for k in tup:
            term *= theta / (theta + k)
        total += term
    return total


def _thetas(seed: int, count: int) -> List[Fraction]:
    rng = random.Random(seed)
    return [Fraction(rng.randint(1, 97), rng.randint(1, 31)) for _ in range(count)]


def suite_examples(**_) -> List[str]:
    fails = []
    checks = [
        ("C(60,30)", exact.binomial(60, 30), 118264581564861424),
        ("lhs(2,1,1/2)", exact.lhs_alternating_sum(IdentityInstance(2, 1, Fraction(1, 2))), Fraction(8, 15)),
        ("lhs(2,2,1)", exact.lhs_alternating_sum(IdentityInstance(2, 2, 1)), Fraction(11, 18)),
        ("rhs_product(5,2)", exact.rhs_product(5, 2), Fraction(1, 21)),
        ("rhs(2,2,1)", exact.rhs_general(IdentityInstance(2, 2, 1)), Fraction(11, 18)),
        ("rhs(1,3,1)", exact.rhs_general(IdentityInstance(1, 3, 1)), Fraction(7, 8)),
        ("h(2,2,1)", exact.h_complete(2, 2, 1), Fraction(19, 36)),
    ]
    for name, got, want in checks:
        if got != want:
            fails.append(f"{name}: got {got}, want {want}")
    return fails


def suite_identity_grid(seed: int = 42, **_) -> List[str]:
    thetas = _thetas(seed, 5) + [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(-7, 2)]
    fails = []
    for n in range(0, 61, 3):
        for m in range(1, 7):
            for theta in thetas:
                inst = IdentityInstance(n, m, theta)
                if exact.lhs_alternating_sum(inst) != exact.rhs_general(inst):
                    fails.append(f"identity fails at {inst}")
    return fails


def suite_telescoping(**_) -> List[str]:
    return [
        f"lhs(n={n}, m=1, theta=1) != 1/{n + 1}"
        for n in range(101)
        if exact.lhs_alternating_sum(IdentityInstance(n, 1, 1)) != Fraction(1, n + 1)
    ]


def suite_pascal(**_) -> List[str]:
    return [
        f"Pascal rule fails at C({n},{k})"
        for n in range(1, 201)
        for k in range(1, n + 1)
        if exact.binomial(n, k) != exact.binomial(n - 1, k - 1) + exact.binomial(n - 1, k)
    ]


def suite_h_oracle(seed: int = 42, **_) -> List[str]:
    fails = []
    for theta in _thetas(seed + 1, 4):
        for n in range(7):
            for j in range(5):
                if exact.h_complete(j, n, theta) != h_enumerate(j, n, theta):
                    fails.append(f"h_{j}(n={n}, theta={theta}) disagrees with enumeration")
    return fails


def suite_cancellation(**_) -> List[str]:
    inst = IdentityInstance(60, 1, 1)
    fails = []
    if exact.rhs_general(inst) != Fraction(1, 61):
        fails.append("exact value at (60,1,1) is not 1/61")
    if floateval.cancellation_index(inst) != 2**61 - 1:
        fails.append("cancellation index at (60,1,1) is not 2^61 - 1")
    naive = floateval.eval_float(inst, EvalStrategy.NAIVE_SUM).rel_error
    prod = floateval.eval_float(inst, EvalStrategy.PRODUCT_FORM).rel_error
    if not naive >= 1e-2:
        fails.append(f"NaiveSum rel_error {naive:.3e} < 1e-2")
    if not prod <= 1e-13:
        fails.append(f"ProductForm rel_error {prod:.3e} > 1e-13")
    return fails


def suite_stability_split(**_) -> List[str]:
    fails = []
    for n in (40, 50, 60):
        for theta in (Fraction(1, 2), Fraction(1), Fraction(2)):
            inst = IdentityInstance(n, 1, theta)
            naive = floateval.eval_float(inst, EvalStrategy.NAIVE_SUM).rel_error
            prod = floateval.eval_float(inst, EvalStrategy.PRODUCT_FORM).rel_error
            if not prod < naive:
                fails.append(f"{inst}: ProductForm {prod:.3e} >= NaiveSum {naive:.3e}")
    return fails


def suite_codec(seed: int = 42, **_) -> List[str]:
    rng = random.Random(seed)
    fails = []
    for _ in range(200):
        x = Fraction(rng.randint(-10**30, 10**30), rng.randint(1, 10**20))
        if exact.parse_rational(exact.format_rational(x)) != x:
            fails.append(f"rational codec round-trip fails for {x}")
    return fails


def _cfg(seed: int) -> mc.StreamConfig:
    return mc.StreamConfig.for_samples(1_000_000, seed)


def suite_mc_two_route(seed: int = 42, threads: Optional[int] = None, **_) -> List[str]:
    fails = []
    for n in (1, 2, 5, 10):
        for m in (1, 2, 3):
            for theta in (Fraction(1, 2), Fraction(1), Fraction(2)):
                inst = IdentityInstance(n, m, theta)
                est = mc.estimate_p_less(inst, _cfg(seed), threads)
                target = exact.rhs_general(inst)
                if not est.within(target, 4.0):
                    fails.append(
                        f"{inst}: p_hat={est.p_hat:.6f} vs {float(target):.6f} "
                        f"(> 4 stderr, stderr={est.stderr:.2e})"
                    )
    return fails


def suite_mc_lemma(seed: int = 42, threads: Optional[int] = None, **_) -> List[str]:
    fails = []
    for n in (1, 3, 5, 10):
        for theta in (Fraction(1, 2), Fraction(1), Fraction(2)):
            target = mc.exact_laplace(n, theta)
            a = mc.estimate_laplace(n, float(theta), _cfg(seed), mc.Representation.MAX_FORM, threads)
            b = mc.estimate_laplace(n, float(theta), _cfg(seed + 1), mc.Representation.SUM_FORM, threads)
            for label, est in (("max", a), ("sum", b)):
                if not est.within(target, 4.0):
                    fails.append(f"{label} form n={n} theta={theta}: {est.p_hat:.6f} vs {float(target):.6f}")
            if abs(a.p_hat - b.p_hat) > 5.0 * math.hypot(a.stderr, b.stderr):
                fails.append(f"max/sum forms disagree at n={n} theta={theta}")
    return fails


def suite_mc_facts(seed: int = 42, threads: Optional[int] = None, **_) -> List[str]:
    fails = []
    race = mc.two_exp_race(1.0, 3.0, _cfg(seed), threads)
    if not race.within(0.25, 4.0):
        fails.append(f"race(1,3) = {race.p_hat:.6f}, want 1/4")
    for k in (1, 4, 10):
        est = mc.min_exp_check(k, _cfg(seed), threads)
        if not est.within(0.5, 4.0):
            fails.append(f"min of {k} Exp(1): {est.p_hat:.6f}, want 1/2")
    cond, plain = mc.memoryless_check(1.0, 1.0, _cfg(seed), threads)
    if abs(cond.p_hat - plain.p_hat) > 5.0 * math.hypot(cond.stderr, plain.stderr):
        fails.append(f"memorylessness: {cond.p_hat:.6f} vs {plain.p_hat:.6f}")
    return fails


def suite_determinism(seed: int = 42, **_) -> List[str]:
    inst = IdentityInstance(5, 2, Fraction(3, 2))
    cfg = mc.StreamConfig.for_samples(200_000, seed, 8)
    runs = [
        mc.estimate_p_less(inst, cfg, threads=1),
        mc.estimate_p_less(inst, cfg, threads=1),
        mc.estimate_p_less(inst, cfg, threads=4),
    ]
    if len({r.p_hat for r in runs}) != 1:
        return [f"p_hat differs across runs/thread counts: {[r.p_hat for r in runs]}"]
    return []


FAST_SUITES = [
    ("exact-examples", suite_examples),
    ("identity-grid", suite_identity_grid),
    ("telescoping", suite_telescoping),
    ("pascal-rule", suite_pascal),
    ("h-dp-vs-enumeration", suite_h_oracle),
    ("cancellation-demo", suite_cancellation),
    ("stability-split", suite_stability_split),
    ("rational-codec", suite_codec),
]
MC_SUITES = [
    ("mc-two-route", suite_mc_two_route),
    ("mc-lemma-max-vs-sum", suite_mc_lemma),
    ("mc-small-facts", suite_mc_facts),
    ("mc-determinism", suite_determinism),
]


def run_selftest(
    full: bool = False,
    seed: int = 42,
    threads: Optional[int] = None,
    out: Optional[TextIO] = None,
) -> List[SuiteResult]:
    suites = FAST_SUITES + (MC_SUITES if full else [])
    results = []
    for name, fn in suites:
        try:
            failures = fn(seed=seed, threads=threads)
        except Exception as exc:  # a crashing suite is a failed suite
            failures = [f"{type(exc).__name__}: {exc}"]
        results.append(SuiteResult(name, failures))
        if out is not None:
            status = "PASS" if not failures else "FAIL"
            print(f"{status} {name}", file=out)
            for f in failures[:10]:
                print(f"    {f}", file=out)
    return results
