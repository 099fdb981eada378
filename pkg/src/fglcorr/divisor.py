"""Strata decompositions of normal-crossing divisor classes.

The J-decomposition splits a multi-sum over variables u_1, ..., u_m into
components indexed by subsets J of the variables, the series shadow of
the stratum-by-stratum expansion of a strict normal crossing divisor
class.  The K-theory specialization is the alternating inclusion-
exclusion identity, checked here against a direct product expansion.
Cone-complex combinatorics are covered by a barycentric subdivision
utility on abstract simplicial complexes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import BoundExceeded, InvalidComplex, NonzeroConstantTerm
from .fgl import FormalGroupLaw, multi_sum, multiplicative_law, two_var_sum
from .series import TruncatedSeries, VariableContext, support


@dataclass(frozen=True)
class JDecomposition:
    """Components L_J of a series, keyed by 0/1 support indicators.

    Each monomial u^a of the source contributes u^(a - J) to the
    component with J the support indicator of a, so L_J only involves
    J-supported variables and sum_J u^J L_J reconstructs the source.
    """

    context: VariableContext
    truncation: int
    components: dict

    def component(self, j) -> TruncatedSeries:
        j = tuple(int(b) for b in j)
        ring = next(iter(self.components.values())).ring
        return self.components.get(
            j, TruncatedSeries.zero(self.context, ring, self.truncation)
        )

    def reconstruct(self) -> TruncatedSeries:
        total = None
        for j, series in self.components.items():
            shifted_terms = {}
            for mon, val in series._terms.items():
                shifted_terms[tuple(e + b for e, b in zip(mon, j))] = val
            shifted = TruncatedSeries(
                self.context, series.ring, self.truncation, shifted_terms
            )
            total = shifted if total is None else total + shifted
        if total is None:
            raise InvalidComplex("empty decomposition")
        return total

    def to_json(self):
        return {
            "context": self.context.to_json(),
            "truncation": self.truncation,
            "components": {
                "".join(str(b) for b in j): series.to_json()
                for j, series in sorted(self.components.items())
            },
        }

    @staticmethod
    def from_json(obj) -> "JDecomposition":
        ctx = VariableContext.from_json(obj["context"])
        components = {
            tuple(int(c) for c in key): TruncatedSeries.from_json(doc)
            for key, doc in obj["components"].items()
        }
        return JDecomposition(ctx, int(obj["truncation"]), components)


def j_decompose(s: TruncatedSeries) -> JDecomposition:
    """Split a series into its J-indexed components.

    Requires zero constant term (the empty stratum carries nothing).
    """
    if not s.ring.is_zero(s.constant_term()):
        raise NonzeroConstantTerm("decomposition needs zero constant term")
    m = len(s.context)
    buckets: dict = {}
    for mon, val in s._terms.items():
        j = tuple(1 if e > 0 else 0 for e in mon)
        reduced = tuple(e - b for e, b in zip(mon, j))
        buckets.setdefault(j, {})[reduced] = val
    components = {
        j: TruncatedSeries(s.context, s.ring, s.truncation, terms)
        for j, terms in buckets.items()
    }
    # every subset indicator gets an entry, zero if nothing landed there
    for r in range(m + 1):
        for idx in combinations(range(m), r):
            j = tuple(1 if i in idx else 0 for i in range(m))
            components.setdefault(
                j, TruncatedSeries.zero(s.context, s.ring, s.truncation)
            )
    return JDecomposition(s.context, s.truncation, components)


def two_component_expansion(law: FormalGroupLaw, truncation: int,
                            names=("D1", "D2")) -> TruncatedSeries:
    """D_1 + D_2 + D_1 D_2 * (sum a_ij D_1^(i-1) D_2^(j-1)).

    The same series as the two-variable formal sum, regrouped so the
    third summand is visibly supported on the intersection.
    """
    if truncation > law.degree_bound + 1:
        raise BoundExceeded(
            f"truncation {truncation} exceeds law bound {law.degree_bound} + 1"
        )
    ctx = VariableContext(tuple(names))
    ring = law.ring
    d1 = TruncatedSeries.variable(ctx, ring, truncation, names[0])
    d2 = TruncatedSeries.variable(ctx, ring, truncation, names[1])
    inner_terms = {}
    for (i, j), val in law.coefficients.items():
        if i >= 1 and j >= 1:
            inner_terms[(i - 1, j - 1)] = val
    inner = TruncatedSeries(ctx, ring, truncation, inner_terms)
    return d1 + d2 + d1 * d2 * inner


@dataclass(frozen=True)
class DecompositionVerdict:
    ok: bool
    first_difference: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def series_difference_verdict(a: TruncatedSeries,
                              b: TruncatedSeries) -> DecompositionVerdict:
    diff = a - b
    if diff.is_zero():
        return DecompositionVerdict(True)
    return DecompositionVerdict(False, diff.sorted_monomials()[0])


def inclusion_exclusion_check(k: int) -> DecompositionVerdict:
    """Check the alternating-sign expansion for the multiplicative law.

    The multi-sum of k variables must equal
    sum over nonempty S of (-1)^(|S|+1) prod_{i in S} u_i,
    computed here by direct subset enumeration as an independent route.
    """
    if k < 1:
        raise BoundExceeded("need at least one component")
    bound = max(k, 2)
    law = multiplicative_law(bound)
    names = tuple(f"u{i}" for i in range(1, k + 1))
    ctx = VariableContext(names)
    trunc = k + 1
    lhs = multi_sum(law, names, [1] * k, trunc, ctx)
    terms = {}
    for r in range(1, k + 1):
        sign = 1 if r % 2 == 1 else -1
        for idx in combinations(range(k), r):
            mon = tuple(1 if i in idx else 0 for i in range(k))
            terms[mon] = law.ring.from_int(sign)
    rhs = TruncatedSeries(ctx, law.ring, trunc, terms)
    return series_difference_verdict(lhs, rhs)


# ---------------- cone-complex combinatorics ----------------


class ConeComplexModel:
    """Abstract simplicial complex: vertex set plus downward-closed faces."""

    def __init__(self, vertices, faces):
        self.vertices = frozenset(vertices)
        self.faces = frozenset(frozenset(f) for f in faces)
        for f in self.faces:
            if not f:
                raise InvalidComplex("empty face stored explicitly")
            if not f <= self.vertices:
                raise InvalidComplex(f"face {sorted(f)} uses unknown vertices")
            for sub in combinations(sorted(f), len(f) - 1):
                if sub and frozenset(sub) not in self.faces:
                    raise InvalidComplex(
                        f"faces not downward closed at {sorted(f)}"
                    )
        for v in self.vertices:
            if frozenset({v}) not in self.faces and self.faces:
                raise InvalidComplex(f"vertex {v!r} is not a face")
        if self.vertices and not self.faces:
            raise InvalidComplex("vertices without singleton faces")

    @staticmethod
    def from_maximal_faces(faces) -> "ConeComplexModel":
        closure = set()
        vertices = set()
        for f in faces:
            f = tuple(f)
            vertices.update(f)
            for r in range(1, len(f) + 1):
                for sub in combinations(sorted(f), r):
                    closure.add(frozenset(sub))
        return ConeComplexModel(vertices, closure)

    @staticmethod
    def empty() -> "ConeComplexModel":
        return ConeComplexModel((), ())

    def dimension(self) -> int:
        return max((len(f) for f in self.faces), default=0) - 1

    def f_vector(self):
        counts = [0] * (self.dimension() + 1)
        for f in self.faces:
            counts[len(f) - 1] += 1
        return tuple(counts)

    def top_faces(self):
        return [f for f in self.faces
                if not any(f < g for g in self.faces)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConeComplexModel):
            return NotImplemented
        return self.vertices == other.vertices and self.faces == other.faces

    def to_json(self):
        def label(v):
            if isinstance(v, frozenset):
                return sorted((label(x) for x in v), key=str)
            return v

        return {
            "vertices": sorted((label(v) for v in self.vertices), key=str),
            "faces": sorted(
                (sorted((label(v) for v in f), key=str) for f in self.faces),
                key=lambda f: (len(f), str(f)),
            ),
        }


def barycentric_subdivide(c: ConeComplexModel) -> ConeComplexModel:
    """Standard barycentric subdivision.

    Vertices of the result are the faces of the input; faces are the
    chains of faces under strict inclusion.
    """
    faces = sorted(c.faces, key=lambda f: (len(f), sorted(f)))
    chains = []

    def grow(chain):
        chains.append(frozenset(chain))
        for g in faces:
            if len(g) > len(chain[-1]) and chain[-1] < g:
                grow(chain + [g])

    for f in faces:
        grow([f])
    return ConeComplexModel(set(c.faces), chains)
