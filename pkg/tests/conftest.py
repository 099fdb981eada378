"""Shared fixtures: a small associative quantum-algebra datum and helpers."""

import random
from fractions import Fraction

import pytest


def p2_style_doc():
    """Structure constants of Q[h]/(h^3 = q), split by Novikov weight.

    Basis 1, h, h^2 with the antidiagonal intersection pairing.  The
    weight-0 tensor is the truncated cup product, the weight-1 tensor
    carries the wrap-around products; together they present an honest
    associative algebra, so the associativity check must pass exactly.
    """
    n = 3

    def mu(weight):
        target = 2 if weight == 0 else 5
        return [
            [
                [
                    1 if i + j + k == target and (weight == 1) == (i + j >= 3)
                    else 0
                    for k in range(n)
                ]
                for j in range(n)
            ]
            for i in range(n)
        ]

    return {
        "basis": ["one", "h", "h2"],
        "degrees": [0, 2, 4],
        "pairing": [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
        "unit": [1, 0, 0],
        "classes": [
            {"name": "const", "area": "0", "correlator": mu(0)},
            {"name": "line", "area": "1", "correlator": mu(1)},
        ],
    }


def random_datum_doc(seed, with_tables=True):
    """A seeded two-basis datum with bubbles and arbitrary tables."""
    rng = random.Random(seed)

    def tensor():
        return [
            [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
            for _ in range(2)
        ]

    cup = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
    # unit axiom: mu_0(e_0, e_j) must come back as e_j under the pairing
    pairing = [[0, 1], [1, 0]]
    cup[0][0][1] = 1  # <e0 e0, e1> = P(e0, e1)
    cup[0][1][0] = 1
    cup[1][0][0] = 1
    cup[1][1][rng.randint(0, 1)] = rng.randint(-2, 2)

    classes = [
        {"name": "const", "area": "0", "correlator": cup},
    ]
    areas = sorted(
        {Fraction(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(3)}
    )
    for idx, area in enumerate(areas):
        bubble_areas = sorted(
            (Fraction(rng.randint(1, 4), rng.randint(1, 2))
             for _ in range(rng.randint(0, 3))),
            reverse=True,
        )
        bubbles = [
            {"class": f"d{idx}_{k}", "area": str(a)}
            for k, a in enumerate(bubble_areas)
        ]
        table = []
        if with_tables and bubbles:
            seen = set()
            for _ in range(rng.randint(1, 4)):
                mon = tuple(rng.randint(0, 2) for _ in bubbles)
                if sum(mon) == 0 or mon in seen:
                    continue
                seen.add(mon)
                table.append({"monomial": list(mon), "tensor": tensor()})
        classes.append({
            "name": f"beta{idx}",
            "area": str(area),
            "correlator": tensor(),
            "bubbles": bubbles,
            "table": table,
        })
    return {
        "basis": ["e0", "e1"],
        "degrees": [0, 2],
        "pairing": pairing,
        "unit": [1, 0],
        "classes": classes,
    }


@pytest.fixture
def p2_doc():
    return p2_style_doc()
