"""Quantum products from user data: loading, products, associativity."""

import copy
import json
from fractions import Fraction

import pytest

from conftest import p2_style_doc, random_datum_doc
from fglcorr.errors import (
    CutoffNonpositive,
    SchemaError,
    SingularPairing,
    TableArityMismatch,
    UnitAxiomViolation,
    UnorderedBubbles,
)
from fglcorr.fgl import (
    additive_law,
    honda_law,
    multiplicative_law,
)
from fglcorr.gw import (
    NovikovSeries,
    associativity_check,
    corrected_product,
    load_datum,
    naive_product,
    star_product,
)
from fglcorr.rings import RationalRing

QQ = RationalRing()


# ---------------- loading and validation ----------------


def test_load_p2_doc(p2_doc):
    d = load_datum(p2_doc)
    assert d.basis == ("one", "h", "h2")
    assert len(d.classes) == 2


def test_singular_pairing_rejected(p2_doc):
    p2_doc["pairing"] = [[1, 0, 0], [0, 1, 0], [1, 0, 0]]
    with pytest.raises(SingularPairing):
        load_datum(p2_doc)


def test_unordered_bubbles_rejected(p2_doc):
    p2_doc["classes"][1]["bubbles"] = [
        {"class": "small", "area": "1/2"},
        {"class": "big", "area": "2"},
    ]
    with pytest.raises(UnorderedBubbles):
        load_datum(p2_doc)


def test_equal_area_bubbles_allowed(p2_doc):
    p2_doc["classes"][1]["bubbles"] = [
        {"class": "x", "area": "1/2"},
        {"class": "y", "area": "1/2"},
    ]
    load_datum(p2_doc)


def test_unit_axiom_violation(p2_doc):
    p2_doc["classes"][0]["correlator"][0][1][1] = 5
    with pytest.raises(UnitAxiomViolation):
        load_datum(p2_doc)


def test_table_arity_mismatch(p2_doc):
    p2_doc["classes"][1]["bubbles"] = [{"class": "d", "area": "1/2"}]
    p2_doc["classes"][1]["table"] = [
        {"monomial": [1, 1], "tensor": p2_doc["classes"][1]["correlator"]}
    ]
    with pytest.raises(TableArityMismatch):
        load_datum(p2_doc)


def test_floats_rejected(p2_doc):
    p2_doc["unit"] = [1.0, 0, 0]
    with pytest.raises(SchemaError):
        load_datum(p2_doc)


def test_negative_area_rejected(p2_doc):
    p2_doc["classes"][1]["area"] = "-1"
    with pytest.raises(SchemaError):
        load_datum(p2_doc)


# ---------------- naive product ----------------


def test_beta_zero_only_is_cup_product(p2_doc):
    doc = {**p2_doc, "classes": p2_doc["classes"][:1]}
    d = load_datum(doc)
    h = d.basis_vector(1)
    prod = naive_product(d, h, h, 5)
    assert prod.terms == ((Fraction(0), d.basis_vector(2)),)
    # h * h2 pairs to the top class, h2 * h2 to zero
    top = naive_product(d, h, d.basis_vector(2), 5)
    assert top.terms == ()  # h * h^2 = h^3 = 0 without the quantum term


def test_unit_acts_as_identity(p2_doc):
    d = load_datum(p2_doc)
    for i in range(3):
        prod = naive_product(d, d.unit, d.basis_vector(i), 5)
        assert prod.terms[0] == (Fraction(0), d.basis_vector(i))
        assert len(prod.terms) == 1  # no quantum tail on the unit


def test_quantum_term_appears(p2_doc):
    d = load_datum(p2_doc)
    h2 = d.basis_vector(2)
    prod = naive_product(d, h2, h2, 5)
    assert prod.terms == ((Fraction(1), d.basis_vector(1)),)


def test_cutoff_positive_required(p2_doc):
    d = load_datum(p2_doc)
    with pytest.raises(CutoffNonpositive):
        naive_product(d, d.unit, d.unit, 0)


# ---------------- corrected product ----------------


@pytest.mark.parametrize("law_factory", [
    additive_law, multiplicative_law, lambda b: honda_law(2, 1, b)
], ids=["additive", "multiplicative", "honda21"])
def test_empty_bubbles_corrected_equals_naive(p2_doc, law_factory):
    d = load_datum(p2_doc)
    law = law_factory(4)
    for i in range(3):
        for j in range(3):
            a, b = d.basis_vector(i), d.basis_vector(j)
            assert corrected_product(d, law, a, b, 5, 5) == \
                naive_product(d, a, b, 5)


def test_additive_law_is_transparent_on_random_datum():
    for seed in (1, 2, 3):
        d = load_datum(random_datum_doc(seed))
        law = additive_law(4)
        for i in range(2):
            for j in range(2):
                a, b = d.basis_vector(i), d.basis_vector(j)
                assert corrected_product(d, law, a, b, 4, 5) == \
                    naive_product(d, a, b, 4)


def test_multiplicative_alternating_chain_sum():
    # two bubble divisors, square-free tables only: the corrected tensor
    # must be mu - T10 - T01 + T11 (signs (-1)^m on m-chains)
    def tensor(c):
        return [[[c, 0], [0, 0]], [[0, 0], [0, 0]]]

    doc = random_datum_doc(9, with_tables=False)
    cls = {
        "name": "beta",
        "area": "1",
        "correlator": tensor(1),
        "bubbles": [
            {"class": "d0", "area": "2"},
            {"class": "d1", "area": "1"},
        ],
        "table": [
            {"monomial": [1, 0], "tensor": tensor(5)},
            {"monomial": [0, 1], "tensor": tensor(7)},
            {"monomial": [1, 1], "tensor": tensor(100)},
            {"monomial": [2, 0], "tensor": tensor(1000)},  # never hit: f is square-free
        ],
    }
    doc["classes"] = [doc["classes"][0], cls]
    d = load_datum(doc)
    law = multiplicative_law(4)
    e0 = d.basis_vector(0)
    prod = corrected_product(d, law, e0, e0, 2, 5)
    expected_weight = Fraction(1 - 5 - 7 + 100)
    # tensor(c) contracted with (e0, e0) gives covector (c, 0); the
    # antidiagonal pairing flips it to (0, c)
    expected = (Fraction(0), expected_weight)
    (t, vec), = [term for term in prod.terms if term[0] == 1]
    assert vec == expected


def test_corrected_beta_zero_only_any_law(p2_doc):
    doc = {**p2_doc, "classes": p2_doc["classes"][:1]}
    d = load_datum(doc)
    for law in (additive_law(4), multiplicative_law(4), honda_law(2, 1, 4)):
        h = d.basis_vector(1)
        assert corrected_product(d, law, h, h, 3, 4) == \
            naive_product(d, h, h, 3)


def test_bilinearity_exact():
    d = load_datum(random_datum_doc(17))
    law = multiplicative_law(4)
    ring = d.ring
    a0, a1 = d.basis_vector(0), d.basis_vector(1)
    b = tuple(ring.parse(s) for s in ("2", "-3"))
    lhs = corrected_product(
        d, law,
        tuple(ring.add(ring.mul(Fraction(2), x), ring.mul(Fraction(-1), y))
              for x, y in zip(a0, a1)),
        b, 4, 5,
    )
    p0 = corrected_product(d, law, a0, b, 4, 5)
    p1 = corrected_product(d, law, a1, b, 4, 5)
    combo_terms = {}
    for t, vec in p0.terms:
        combo_terms[t] = tuple(ring.mul(Fraction(2), x) for x in vec)
    for t, vec in p1.terms:
        prev = combo_terms.get(t, (ring.zero(),) * 2)
        combo_terms[t] = tuple(
            ring.add(p, ring.mul(Fraction(-1), x)) for p, x in zip(prev, vec)
        )
    assert lhs == NovikovSeries(ring, Fraction(4), list(combo_terms.items()))


def test_cutoff_monotonicity():
    d = load_datum(random_datum_doc(23))
    law = multiplicative_law(4)
    a, b = d.basis_vector(0), d.basis_vector(1)
    small = corrected_product(d, law, a, b, 2, 5)
    large = corrected_product(d, law, a, b, 5, 5)
    assert large.restrict(2) == small


def test_order_tie_invariance():
    # two equal-area bubbles; tables vanish on monomials using both;
    # permuting the pair (and the table coordinates) is invisible.  The
    # height-1 law at p=2 has Laurent coefficients, so the datum lives
    # over the same ring.
    def tensor(c):
        return [[[str(c), "0"], ["0", "0"]], [["0", "0"], ["0", "0"]]]

    law = honda_law(2, 1, 4)
    cup = [[["0", "1"], ["1", "0"]], [["1", "0"], ["0", "0"]]]
    cls = {
        "name": "beta",
        "area": "1",
        "correlator": tensor(1),
        "bubbles": [
            {"class": "x", "area": "1"},
            {"class": "y", "area": "1"},
        ],
        "table": [
            {"monomial": [1, 0], "tensor": tensor("v")},
            {"monomial": [0, 1], "tensor": tensor(1)},
            {"monomial": [2, 0], "tensor": tensor("v^2")},
            {"monomial": [0, 2], "tensor": tensor(1)},
        ],
    }
    doc = {
        "ring": law.ring.to_json(),
        "basis": ["e0", "e1"],
        "degrees": [0, 2],
        "pairing": [["0", "1"], ["1", "0"]],
        "unit": ["1", "0"],
        "classes": [
            {"name": "const", "area": "0", "correlator": cup},
            cls,
        ],
    }
    swapped = copy.deepcopy(doc)
    swapped["classes"][1]["bubbles"] = list(
        reversed(swapped["classes"][1]["bubbles"])
    )
    for entry in swapped["classes"][1]["table"]:
        entry["monomial"] = list(reversed(entry["monomial"]))
    d1, d2 = load_datum(doc), load_datum(swapped)
    for i in range(2):
        for j in range(2):
            a, b = d1.basis_vector(i), d1.basis_vector(j)
            assert corrected_product(d1, law, a, b, 2, 5) == \
                corrected_product(d2, law, a, b, 2, 5)


# ---------------- associativity ----------------


def test_fixture_is_associative(p2_doc):
    d = load_datum(p2_doc)
    report = associativity_check(d, multiplicative_law(4), 5, 5)
    assert report.associative
    assert report.render(d.ring).startswith("associative")


def test_perturbed_fixture_fails_at_its_weight(p2_doc):
    p2_doc["classes"][1]["correlator"][2][2][1] = 2
    d = load_datum(p2_doc)
    report = associativity_check(d, multiplicative_law(4), 5, 5)
    assert not report.associative
    assert report.first[0] == Fraction(1)  # localized at the perturbed weight
    assert report.worst[0] >= report.first[0]
    assert not report.render(d.ring).startswith("associative")


def test_beta_zero_cup_is_associative(p2_doc):
    doc = {**p2_doc, "classes": p2_doc["classes"][:1]}
    d = load_datum(doc)
    report = associativity_check(d, additive_law(4), 5, 5)
    assert report.associative


def test_star_product_extends_bilinearly(p2_doc):
    d = load_datum(p2_doc)
    law = additive_law(4)
    h = d.basis_vector(1)
    hh = star_product(d, law, h, h, 5, 5)
    hhh = star_product(d, law, hh, h, 5, 5)
    # h * h = h^2, then (h * h) * h = q * 1
    assert hhh.terms == ((Fraction(1), d.basis_vector(0)),)


# ---------------- serialization ----------------


def test_novikov_json_round_trip(p2_doc):
    d = load_datum(p2_doc)
    prod = naive_product(d, d.basis_vector(2), d.basis_vector(2), 5)
    assert NovikovSeries.from_json(prod.to_json()) == prod


def test_novikov_render_deterministic(p2_doc):
    d = load_datum(p2_doc)
    prod = naive_product(d, d.basis_vector(2), d.basis_vector(2), 5)
    assert prod.render() == prod.render()
    assert json.dumps(prod.to_json(), sort_keys=True) == \
        json.dumps(prod.to_json(), sort_keys=True)
