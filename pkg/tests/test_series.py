"""Truncated series arithmetic, substitution, reversion, serialization."""

import random
from fractions import Fraction

import pytest

from fglcorr.errors import (
    ContextMismatch,
    NonUnitLinearTerm,
    NonzeroConstantTerm,
    OutOfTruncation,
)
from fglcorr.rings import GradedCoefficient, LaurentRing, RationalRing
from fglcorr.series import TruncatedSeries, VariableContext

QQ = RationalRing()
XY = VariableContext(("x", "y"))


def var(name, trunc=6, ctx=XY, ring=QQ):
    return TruncatedSeries.variable(ctx, ring, trunc, name)


def test_product_of_sum_and_difference():
    x, y = var("x", 4), var("y", 4)
    assert (x + y) * (x - y) == x * x - y * y


def test_truncation_drops_top_degree():
    x, y = var("x", 3), var("y", 3)
    s = x * (x + y)  # degree-2 terms survive at truncation 3
    assert s.coefficient_of((2, 0)).value == 1
    t = (x * x) * (x + y)  # all products have degree 3, everything drops
    assert t.is_zero()


def test_scale_by_laurent_unit():
    k = LaurentRing(3, 1)
    ctx = VariableContext(("x", "y"))
    x = TruncatedSeries.variable(ctx, k, 4, "x")
    y = TruncatedSeries.variable(ctx, k, 4, "y")
    v = GradedCoefficient(k, {1: 1})
    s = (x + y).scale(v)
    assert s.coefficient_of((1, 0)).value == {1: 1}
    assert s.coefficient_of((0, 1)).value == {1: 1}


def test_substitute_zero_kills_variable():
    x, y = var("x"), var("y")
    s = x + y - x * y
    assert s.substitute({"x": 0}) == y


def test_substitute_shift():
    x, y = var("x"), var("y")
    s = x * x
    expanded = s.substitute({"x": x + y})
    assert expanded == x * x + (x * y).scale(2) + y * y


def test_substitute_reproduces_doubled_multiplicative_sum():
    # oracle: 1 - (1-u)^2 (1-v) expanded by hand at truncation 4
    ctx = VariableContext(("u", "v"))
    u = TruncatedSeries.variable(ctx, QQ, 4, "u")
    v = TruncatedSeries.variable(ctx, QQ, 4, "v")
    one = TruncatedSeries.one(ctx, QQ, 4)
    oracle = one - (one - u) * (one - u) * (one - v)
    law_sum = u + v - u * v  # L(u, v) for the multiplicative law
    two_u = u.scale(2) - u * u  # [2]u
    assert law_sum.substitute({"u": two_u, "v": v}) == oracle


def test_substitute_requires_zero_constant_term():
    x = var("x")
    with pytest.raises(NonzeroConstantTerm):
        x.substitute({"x": TruncatedSeries.one(XY, QQ, 6)})


def test_reversion_identity():
    x = var("x")
    assert x.reversion("x") == x


def test_reversion_catalan_signs():
    # inverse of x + x^2 is x - x^2 + 2x^3 - 5x^4 + ... (signed Catalan)
    x = var("x")
    s = x + x * x
    t = s.reversion("x")
    expected = {(1, 0): 1, (2, 0): -1, (3, 0): 2, (4, 0): -5, (5, 0): 14}
    for mon, c in expected.items():
        assert t.coefficient_of(mon).value == Fraction(c)
    # compose-and-check oracle in both orders
    assert s.substitute({"x": t}) == x
    assert t.substitute({"x": s}) == x


def test_reversion_of_log_series():
    ctx = VariableContext(("x",))
    terms = {(k,): Fraction(1, k) for k in range(1, 6)}
    s = TruncatedSeries(ctx, QQ, 6, terms)  # -log(1-x) truncated
    t = s.reversion("x")
    # 1 - exp(-x) = x - x^2/2 + x^3/6 - x^4/24 + ...
    assert t.coefficient_of((2,)).value == Fraction(-1, 2)
    assert t.coefficient_of((3,)).value == Fraction(1, 6)
    assert t.coefficient_of((4,)).value == Fraction(-1, 24)
    assert s.substitute({"x": t}) == TruncatedSeries.variable(ctx, QQ, 6, "x")


def test_reversion_needs_unit_linear_term():
    x = var("x")
    with pytest.raises(NonUnitLinearTerm):
        (x * x).reversion("x")


def test_coefficient_of_examples():
    x, y = var("x"), var("y")
    s = x + y - x * y
    assert s.coefficient_of((1, 1)).value == Fraction(-1)
    assert s.coefficient_of((1, 0)).value == Fraction(1)
    assert s.coefficient_of((3, 0)).is_zero()
    with pytest.raises(OutOfTruncation):
        s.coefficient_of((6, 0))


def _random_series(rng, ctx, trunc, zero_const=False):
    terms = {}
    n = len(ctx)
    for _ in range(rng.randint(1, 6)):
        mon = tuple(rng.randint(0, 2) for _ in range(n))
        if zero_const and sum(mon) == 0:
            continue
        terms[mon] = Fraction(rng.randint(-4, 4))
    return TruncatedSeries(ctx, QQ, trunc, terms)


def test_mul_associative_commutative_random():
    rng = random.Random(23)
    for _ in range(30):
        a = _random_series(rng, XY, 6)
        b = _random_series(rng, XY, 6)
        c = _random_series(rng, XY, 6)
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)


def test_substitution_functorial_random():
    rng = random.Random(29)
    ctx = VariableContext(("x", "y"))
    for _ in range(15):
        s = _random_series(rng, ctx, 5)
        g = _random_series(rng, ctx, 5, zero_const=True)
        h = _random_series(rng, ctx, 5, zero_const=True)
        inner = {"x": g, "y": h}
        step1 = s.substitute(inner)
        gh = {name: v.substitute(inner) for name, v in
              (("x", TruncatedSeries.variable(ctx, QQ, 5, "x")),)}
        # compose the assignments directly: x -> g, then both into identity
        composed = s.substitute({"x": g, "y": h})
        assert step1 == composed
        two_step = s.substitute({"x": g}).substitute({"y": h})
        merged = s.substitute({"x": g.substitute({"y": h}), "y": h})
        assert two_step == merged


def test_reversion_round_trip_random():
    rng = random.Random(31)
    ctx = VariableContext(("x",))
    x = TruncatedSeries.variable(ctx, QQ, 6, "x")
    for _ in range(15):
        terms = {(1,): Fraction(rng.choice([1, -1, 2, 3]))}
        for k in range(2, 6):
            terms[(k,)] = Fraction(rng.randint(-3, 3))
        s = TruncatedSeries(ctx, QQ, 6, terms)
        t = s.reversion("x")
        assert s.substitute({"x": t}) == x
        assert t.substitute({"x": s}) == x


def test_canonical_term_order_is_graded_lex():
    x, y = var("x"), var("y")
    s = y + x + x * x + x * y
    assert s.sorted_monomials() == [(1, 0), (0, 1), (2, 0), (1, 1)]
    assert s.render() == "x + y + x^2 + x*y"


def test_homogeneity_validation():
    # deg(x) = deg(y) = 2: x + y is homogeneous of degree 2, x + xy is not
    s = TruncatedSeries(XY, QQ, 4, {(1, 0): 1, (0, 1): 1}, homogeneity=2)
    assert s.homogeneity == 2
    with pytest.raises(ContextMismatch):
        TruncatedSeries(XY, QQ, 4, {(1, 0): 1, (1, 1): 1}, homogeneity=2)


def test_context_mismatch_errors():
    other = VariableContext(("z",))
    z = TruncatedSeries.variable(other, QQ, 4, "z")
    with pytest.raises(ContextMismatch):
        var("x") + z
    with pytest.raises(ContextMismatch):
        var("x").with_context(other)


def test_with_context_and_rename():
    big = VariableContext(("x", "y", "z"))
    s = (var("x") + var("y")).with_context(big)
    assert s.coefficient_of((1, 0, 0)).value == 1
    swapped = (var("x") - var("y")).rename({"x": "y", "y": "x"})
    assert swapped.coefficient_of((1, 0)).value == 1  # first slot now named y
    assert swapped.context.names == ("y", "x")


def test_set_to_zero():
    x, y = var("x"), var("y")
    s = x + y - x * y
    assert s.set_to_zero(["x"]) == y


def test_json_round_trip():
    rng = random.Random(37)
    for _ in range(10):
        s = _random_series(rng, XY, 6)
        assert TruncatedSeries.from_json(s.to_json()) == s
