"""Quantum products over truncated Novikov rings.

User-supplied data (basis, pairing, per-class correlator 3-tensors,
bubble divisor lists and evaluation tables) drives two products: the
naive one, which sums correlators weighted by area exponents, and the
corrected one, which multiplies each class contribution by the
correction series attached to that class's bubble divisors before
evaluating monomials through the class's table.  An associativity
checker reports residuals of (a*b)*c - a*(b*c) on all basis triples.

Whether the tables really come from moduli-space pushforwards is not
checkable here; the associativity report is the exposed validator, and
inconsistent data yields a report rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .correction import LITERAL, DivisorPresentation, compute_correction
from .errors import (
    CutoffNonpositive,
    RingMismatch,
    SchemaError,
    SingularPairing,
    TableArityMismatch,
    UnitAxiomViolation,
    UnorderedBubbles,
)
from .fgl import FormalGroupLaw
from .rings import GradedRing, RationalRing, coerce_value, ring_from_json


def _parse_area(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad area {x!r}") from exc
    raise SchemaError(f"area must be exact rational, got {type(x).__name__}")


def _parse_scalar(ring: GradedRing, x):
    if isinstance(x, str):
        return ring.parse(x)
    if isinstance(x, int):
        return ring.from_int(x)
    if isinstance(x, float):
        raise SchemaError("floating point coefficients are not accepted")
    return ring.canonical(x)


def _vector(ring, entries, n) -> tuple:
    entries = list(entries)
    if len(entries) != n:
        raise SchemaError(f"vector of length {len(entries)}, expected {n}")
    return tuple(_parse_scalar(ring, e) for e in entries)


def _tensor3(ring, data, n) -> tuple:
    if len(data) != n:
        raise SchemaError("correlator tensor has wrong shape")
    out = []
    for mat in data:
        if len(mat) != n:
            raise SchemaError("correlator tensor has wrong shape")
        out.append(tuple(_vector(ring, row, n) for row in mat))
    return tuple(out)


def _invert_matrix(ring: GradedRing, rows):
    """Exact inverse by Gaussian elimination; pivots must be ring units."""
    n = len(rows)
    aug = [list(rows[i]) + [ring.one() if j == i else ring.zero()
                            for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot_row = None
        inv = None
        for r in range(col, n):
            try:
                inv = ring.invert(aug[r][col])
                pivot_row = r
                break
            except ZeroDivisionError:
                continue
        if pivot_row is None:
            raise SingularPairing(f"no invertible pivot in column {col}")
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        aug[col] = [ring.mul(inv, x) for x in aug[col]]
        for r in range(n):
            if r == col:
                continue
            factor = aug[r][col]
            if ring.is_zero(factor):
                continue
            aug[r] = [
                ring.sub(x, ring.mul(factor, y))
                for x, y in zip(aug[r], aug[col])
            ]
    return tuple(tuple(row[n:]) for row in aug)


@dataclass(frozen=True)
class ClassDatum:
    """One curve class: area, correlator, bubble divisors, evaluation table."""

    name: str
    area: Fraction
    correlator: tuple  # n x n x n tensor, all slots covariant
    bubbles: tuple  # of (class name, area), non-increasing areas
    table: dict  # exponent tuple -> n x n x n tensor


class GWDatum:
    """Validated basis/pairing/correlator data for one target space."""

    def __init__(self, ring: GradedRing, basis, degrees, pairing, unit,
                 classes):
        self.ring = ring
        self.basis = tuple(basis)
        n = len(self.basis)
        if len(set(self.basis)) != n or n == 0:
            raise SchemaError("basis names must be nonempty and distinct")
        self.degrees = tuple(degrees)
        if len(self.degrees) != n:
            raise SchemaError("one degree per basis element required")
        self.pairing = tuple(tuple(row) for row in pairing)
        if len(self.pairing) != n or any(len(r) != n for r in self.pairing):
            raise SchemaError("pairing matrix must be square over the basis")
        self.pairing_inv = _invert_matrix(ring, self.pairing)
        self.unit = tuple(unit)
        if len(self.unit) != n:
            raise SchemaError("unit vector has wrong length")
        self.classes = list(classes)

        zero_area = [c for c in self.classes if c.area == 0]
        if len(zero_area) > 1:
            raise SchemaError("at most one area-zero class is allowed")
        for c in self.classes:
            if c.area < 0:
                raise SchemaError(f"class {c.name!r} has negative area")
            areas = [a for _, a in c.bubbles]
            if any(a2 > a1 for a1, a2 in zip(areas, areas[1:])):
                raise UnorderedBubbles(
                    f"bubbles of class {c.name!r} must have non-increasing area"
                )
            nb = len(c.bubbles)
            for mon in c.table:
                if len(mon) != nb:
                    raise TableArityMismatch(
                        f"table monomial {mon} of class {c.name!r} has arity "
                        f"{len(mon)}, expected {nb}"
                    )
        if zero_area:
            mu0 = zero_area[0].correlator
            for j in range(n):
                ej = tuple(
                    ring.one() if t == j else ring.zero() for t in range(n)
                )
                if self.raise_index(self.contract(mu0, self.unit, ej)) != ej:
                    raise UnitAxiomViolation(
                        f"area-zero correlator does not fix basis element {j}"
                    )

    # -- tensor plumbing --------------------------------------------------

    def contract(self, tensor, a, b) -> tuple:
        """c_k = sum_ij mu[i][j][k] a_i b_j (covariant output slot)."""
        ring = self.ring
        n = len(self.basis)
        out = [ring.zero()] * n
        for i in range(n):
            if ring.is_zero(a[i]):
                continue
            for j in range(n):
                if ring.is_zero(b[j]):
                    continue
                ab = ring.mul(a[i], b[j])
                for k in range(n):
                    out[k] = ring.add(out[k], ring.mul(tensor[i][j][k], ab))
        return tuple(out)

    def raise_index(self, covector) -> tuple:
        ring = self.ring
        n = len(self.basis)
        return tuple(
            _sum_ring(ring, (ring.mul(covector[k], self.pairing_inv[k][l])
                             for k in range(n)))
            for l in range(n)
        )

    def basis_vector(self, i: int) -> tuple:
        ring = self.ring
        return tuple(
            ring.one() if t == i else ring.zero()
            for t in range(len(self.basis))
        )

    def zero_vector(self) -> tuple:
        return tuple(self.ring.zero() for _ in self.basis)


def _sum_ring(ring, items):
    acc = ring.zero()
    for x in items:
        acc = ring.add(acc, x)
    return acc


def _vec_add(ring, a, b):
    return tuple(ring.add(x, y) for x, y in zip(a, b))


def _vec_scale(ring, c, a):
    return tuple(ring.mul(c, x) for x in a)


def _vec_is_zero(ring, a) -> bool:
    return all(ring.is_zero(x) for x in a)


def load_datum(obj) -> GWDatum:
    """Build a GWDatum from a JSON-style document, checking all invariants."""
    if not isinstance(obj, dict):
        raise SchemaError("datum document must be an object")
    ring = ring_from_json(obj["ring"]) if "ring" in obj else RationalRing()
    try:
        basis = list(obj["basis"])
        n = len(basis)
        degrees = list(obj.get("degrees", [0] * n))
        pairing = [_vector(ring, row, n) for row in obj["pairing"]]
        unit = _vector(ring, obj["unit"], n)
        classes = []
        for cdoc in obj.get("classes", []):
            bubbles = tuple(
                (b["class"], _parse_area(b["area"]))
                for b in cdoc.get("bubbles", [])
            )
            table = {}
            for entry in cdoc.get("table", []):
                mon = tuple(int(e) for e in entry["monomial"])
                table[mon] = _tensor3(ring, entry["tensor"], n)
            classes.append(
                ClassDatum(
                    name=str(cdoc["name"]),
                    area=_parse_area(cdoc["area"]),
                    correlator=_tensor3(ring, cdoc["correlator"], n),
                    bubbles=bubbles,
                    table=table,
                )
            )
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed datum document: {exc}") from exc
    return GWDatum(ring, basis, degrees, pairing, unit, classes)


class NovikovSeries:
    """Finitely many vector coefficients a_i q^(t_i), t_i < cutoff strictly
    increasing."""

    __slots__ = ("ring", "cutoff", "terms")

    def __init__(self, ring, cutoff, terms):
        cutoff = _parse_area(cutoff)
        if cutoff <= 0:
            raise CutoffNonpositive(f"cutoff {cutoff} must be positive")
        clean = []
        last = None
        for t, vec in sorted(terms, key=lambda tv: tv[0]):
            t = _parse_area(t)
            if t >= cutoff:
                continue
            if last is not None and t == last:
                raise SchemaError("duplicate Novikov exponent")
            last = t
            if not _vec_is_zero(ring, vec):
                clean.append((t, tuple(vec)))
        self.ring = ring
        self.cutoff = cutoff
        self.terms = tuple(clean)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.cutoff == other.cutoff
            and self.terms == other.terms
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "NovikovSeries") -> "NovikovSeries":
        if self.ring != other.ring:
            raise RingMismatch("Novikov series over different rings")
        cutoff = min(self.cutoff, other.cutoff)
        acc = {t: vec for t, vec in self.terms}
        for t, vec in other.terms:
            acc[t] = _vec_add(self.ring, acc[t], vec) if t in acc else vec
        return NovikovSeries(self.ring, cutoff, list(acc.items()))

    def __neg__(self) -> "NovikovSeries":
        return NovikovSeries(
            self.ring, self.cutoff,
            [(t, tuple(self.ring.neg(x) for x in vec)) for t, vec in self.terms],
        )

    def __sub__(self, other: "NovikovSeries") -> "NovikovSeries":
        return self + (-other)

    def restrict(self, cutoff) -> "NovikovSeries":
        return NovikovSeries(self.ring, cutoff, list(self.terms))

    def render(self) -> str:
        if not self.terms:
            return "0"
        ring = self.ring
        return " + ".join(
            "[" + ", ".join(ring.render(x) for x in vec) + f"]*q^({t})"
            for t, vec in self.terms
        )

    def to_json(self):
        return {
            "ring": self.ring.to_json(),
            "cutoff": str(self.cutoff),
            "terms": [
                [str(t), [self.ring.render(x) for x in vec]]
                for t, vec in self.terms
            ],
        }

    @staticmethod
    def from_json(obj) -> "NovikovSeries":
        try:
            ring = ring_from_json(obj["ring"])
            return NovikovSeries(
                ring,
                Fraction(obj["cutoff"]),
                [
                    (Fraction(t), tuple(ring.parse(x) for x in vec))
                    for t, vec in obj["terms"]
                ],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed Novikov document: {exc}") from exc


def _check_cutoff(cutoff) -> Fraction:
    cutoff = _parse_area(cutoff)
    if cutoff <= 0:
        raise CutoffNonpositive(f"cutoff {cutoff} must be positive")
    return cutoff


def naive_product(d: GWDatum, a, b, cutoff) -> NovikovSeries:
    """sum over classes of mu_beta(a, b) q^(area), below the cutoff."""
    cutoff = _check_cutoff(cutoff)
    buckets: dict = {}
    for c in d.classes:
        if c.area >= cutoff:
            continue
        vec = d.raise_index(d.contract(c.correlator, a, b))
        if c.area in buckets:
            vec = _vec_add(d.ring, buckets[c.area], vec)
        buckets[c.area] = vec
    return NovikovSeries(d.ring, cutoff, list(buckets.items()))


_correction_cache: dict = {}


def _correction_series(law: FormalGroupLaw, n_vars: int, truncation: int,
                       negation: str):
    key = (law, n_vars, truncation, negation)
    if key not in _correction_cache:
        pres = DivisorPresentation(
            law, n_vars - 1, truncation, decorated=False, negation=negation
        )
        _correction_cache[key] = compute_correction(pres)
    return _correction_cache[key]


def _class_tensor(d: GWDatum, c: ClassDatum, law, truncation, negation):
    """Evaluate f through the class's table: sum of f-coefficients times
    the tabulated tensors (unlisted monomials count as zero)."""
    if not c.bubbles:
        return c.correlator
    corr = _correction_series(law, len(c.bubbles), truncation, negation)
    n = len(d.basis)
    ring = d.ring
    total = None
    for mon, val in corr.f._terms.items():
        if any(e > 0 for e in mon):
            tensor = c.table.get(mon)
            if tensor is None:
                continue
        else:
            tensor = c.correlator
        weight = coerce_value(law.ring, ring, val)
        contrib = tuple(
            tuple(
                tuple(ring.mul(weight, tensor[i][j][k]) for k in range(n))
                for j in range(n)
            )
            for i in range(n)
        )
        if total is None:
            total = contrib
        else:
            total = tuple(
                tuple(
                    tuple(ring.add(total[i][j][k], contrib[i][j][k])
                          for k in range(n))
                    for j in range(n)
                )
                for i in range(n)
            )
    if total is None:
        zero = ring.zero()
        total = tuple(
            tuple(tuple(zero for _ in range(n)) for _ in range(n))
            for _ in range(n)
        )
    return total


def corrected_product(d: GWDatum, law: FormalGroupLaw, a, b, cutoff,
                      truncation: int, negation: str = LITERAL) -> NovikovSeries:
    """Quantum product with each class weighted by its correction series."""
    cutoff = _check_cutoff(cutoff)
    buckets: dict = {}
    for c in d.classes:
        if c.area >= cutoff:
            continue
        tensor = _class_tensor(d, c, law, truncation, negation)
        vec = d.raise_index(d.contract(tensor, a, b))
        if c.area in buckets:
            vec = _vec_add(d.ring, buckets[c.area], vec)
        buckets[c.area] = vec
    return NovikovSeries(d.ring, cutoff, list(buckets.items()))


def star_product(d: GWDatum, law, x, y, cutoff, truncation: int,
                 negation: str = LITERAL) -> NovikovSeries:
    """Bilinear extension of the corrected product to Novikov series."""
    cutoff = _check_cutoff(cutoff)
    xs = x if isinstance(x, NovikovSeries) else NovikovSeries(
        d.ring, cutoff, [(Fraction(0), tuple(x))]
    )
    ys = y if isinstance(y, NovikovSeries) else NovikovSeries(
        d.ring, cutoff, [(Fraction(0), tuple(y))]
    )
    buckets: dict = {}
    for t1, v1 in xs.terms:
        for t2, v2 in ys.terms:
            shift = t1 + t2
            if shift >= cutoff:
                continue
            inner = corrected_product(
                d, law, v1, v2, cutoff - shift, truncation, negation
            )
            for t, vec in inner.terms:
                tt = t + shift
                buckets[tt] = (
                    _vec_add(d.ring, buckets[tt], vec) if tt in buckets else vec
                )
    return NovikovSeries(d.ring, cutoff, list(buckets.items()))


@dataclass(frozen=True)
class AssociativityReport:
    """Residuals of (e_i * e_j) * e_k - e_i * (e_j * e_k) over all triples."""

    cutoff: Fraction
    residuals: tuple  # of (area, (i, j, k), vector), sorted by (area, triple)

    @property
    def associative(self) -> bool:
        return not self.residuals

    @property
    def first(self):
        return self.residuals[0] if self.residuals else None

    @property
    def worst(self):
        """The residual with the largest area exponent."""
        return max(self.residuals, key=lambda r: r[0]) if self.residuals else None

    def render(self, ring) -> str:
        if self.associative:
            return f"associative up to cutoff {self.cutoff}"
        lines = [f"NOT associative up to cutoff {self.cutoff}:"]
        for t, triple, vec in self.residuals:
            coeffs = ", ".join(ring.render(x) for x in vec)
            lines.append(f"  q^({t}) at triple {triple}: [{coeffs}]")
        return "\n".join(lines)

    def to_json(self, ring):
        return {
            "associative": self.associative,
            "cutoff": str(self.cutoff),
            "residuals": [
                [str(t), list(triple), [ring.render(x) for x in vec]]
                for t, triple, vec in self.residuals
            ],
        }


def associativity_check(d: GWDatum, law: FormalGroupLaw, cutoff,
                        truncation: int,
                        negation: str = LITERAL) -> AssociativityReport:
    """Compare (e_i * e_j) * e_k with e_i * (e_j * e_k) on all basis triples."""
    cutoff = _check_cutoff(cutoff)
    residuals = []
    n = len(d.basis)
    for i in range(n):
        ei = d.basis_vector(i)
        for j in range(n):
            ej = d.basis_vector(j)
            ij = star_product(d, law, ei, ej, cutoff, truncation, negation)
            for k in range(n):
                ek = d.basis_vector(k)
                jk = star_product(d, law, ej, ek, cutoff, truncation, negation)
                left = star_product(d, law, ij, ek, cutoff, truncation, negation)
                right = star_product(d, law, ei, jk, cutoff, truncation, negation)
                diff = left - right
                for t, vec in diff.terms:
                    residuals.append((t, (i, j, k), vec))
    residuals.sort(key=lambda r: (r[0], r[1]))
    return AssociativityReport(cutoff, tuple(residuals))
