"""Exact graded coefficient rings.

Five ring families cover every coefficient that appears in the engine:
the rationals, the integers, prime fields F_p, the graded Laurent rings
F_p[v, v^-1] attached to a prime p and a height n, and polynomial
extensions of a scalar ring by finitely many even-degree generators.
All arithmetic is exact; there is no floating point anywhere.

Values are plain Python data (``Fraction``, ``int``, or dicts mapping
exponents to scalars) kept in a canonical form: fractions reduced with
positive denominator, residues in [0, p), no stored zero terms, and the
``GradedCoefficient`` wrapper guarantees homogeneity.

Grading conventions are cohomological: the Laurent generator v of the
(p, n) ring sits in degree -2(p^n - 1), so that the coefficient of
x^i y^j in a height-n group law (a multiple of v^((i+j-1)/(p^n-1)))
has degree 2 - 2i - 2j.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegreeMismatch, NotPIntegral, RingMismatch, SchemaError

GRADING_Z = "Z"
GRADING_Z2 = "Z/2"

_INT_RE = re.compile(r"-?\d+$")
_FRAC_RE = re.compile(r"(-?\d+)/(\d+)$")
_NAME_POW_RE = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _monomial_sort_key(exponents):
    # graded lexicographic, earlier generators first
    return (sum(exponents), tuple(-e for e in exponents))


class GradedRing:
    """Common protocol for the concrete ring classes below.

    A ring knows how to do exact arithmetic on its raw values, how to
    canonicalize, render and parse them, and what intrinsic degree each
    stored term carries.  The ``grading`` field selects Z or Z/2
    bookkeeping; in Z/2 mode all degrees are reduced modulo 2.
    """

    grading: str

    def reduce_degree(self, d: int) -> int:
        return d % 2 if self.grading == GRADING_Z2 else d

    def degrees_equal(self, d1: int, d2: int) -> bool:
        return self.reduce_degree(d1) == self.reduce_degree(d2)

    # subclasses implement: zero, one, from_int, add, neg, mul, is_zero,
    # canonical, invert, term_degrees, render, parse, to_json

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def degree_of(self, value) -> int:
        """Intrinsic degree of a homogeneous value (0 for zero)."""
        degs = {self.reduce_degree(d) for d in self.term_degrees(value)}
        if not degs:
            return 0
        if len(degs) > 1:
            raise DegreeMismatch(f"inhomogeneous value {self.render(value)!r}")
        return degs.pop()

    def is_homogeneous(self, value) -> bool:
        return len({self.reduce_degree(d) for d in self.term_degrees(value)}) <= 1


@dataclass(frozen=True)
class RationalRing(GradedRing):
    grading: str = GRADING_Z

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def from_int(self, k: int):
        return Fraction(k)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a) -> bool:
        return a == 0

    def canonical(self, a):
        return Fraction(a)

    def invert(self, a):
        if a == 0:
            raise ZeroDivisionError("inverting zero")
        return 1 / Fraction(a)

    def term_degrees(self, a):
        return [] if a == 0 else [0]

    def render(self, a) -> str:
        return str(Fraction(a))

    def parse(self, s: str):
        s = s.strip()
        m = _FRAC_RE.match(s)
        if m:
            return Fraction(int(m.group(1)), int(m.group(2)))
        if _INT_RE.match(s):
            return Fraction(int(s))
        raise SchemaError(f"cannot parse rational {s!r}")

    def to_json(self):
        return {"kind": "rationals", "grading": self.grading}


@dataclass(frozen=True)
class IntegerRing(GradedRing):
    grading: str = GRADING_Z

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, k: int):
        return int(k)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a) -> bool:
        return a == 0

    def canonical(self, a):
        return int(a)

    def invert(self, a):
        if a in (1, -1):
            return a
        raise ZeroDivisionError(f"{a} is not a unit in Z")

    def term_degrees(self, a):
        return [] if a == 0 else [0]

    def render(self, a) -> str:
        return str(a)

    def parse(self, s: str):
        s = s.strip()
        if _INT_RE.match(s):
            return int(s)
        raise SchemaError(f"cannot parse integer {s!r}")

    def to_json(self):
        return {"kind": "integers", "grading": self.grading}


@dataclass(frozen=True)
class PrimeFieldRing(GradedRing):
    p: int = 2
    grading: str = GRADING_Z

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, k: int):
        return int(k) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def canonical(self, a):
        return int(a) % self.p

    def invert(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverting zero residue")
        return pow(a, self.p - 2, self.p)

    def term_degrees(self, a):
        return [] if a % self.p == 0 else [0]

    def render(self, a) -> str:
        return str(a % self.p)

    def parse(self, s: str):
        s = s.strip()
        if _INT_RE.match(s):
            return int(s) % self.p
        raise SchemaError(f"cannot parse residue {s!r}")

    def to_json(self):
        return {"kind": "prime_field", "p": self.p, "grading": self.grading}


@dataclass(frozen=True)
class LaurentRing(GradedRing):
    """F_p[v, v^-1] with deg(v) = -2(p^n - 1).

    Values are dicts {v-exponent: nonzero residue mod p}.  An element is
    homogeneous in the Z-grading only if it is a monomial in v.
    """

    p: int = 2
    n: int = 1
    grading: str = GRADING_Z

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.n < 1:
            raise ValueError("height must be >= 1")

    @property
    def v_degree(self) -> int:
        return -2 * (self.p**self.n - 1)

    def zero(self):
        return {}

    def one(self):
        return {0: 1}

    def from_int(self, k: int):
        r = int(k) % self.p
        return {0: r} if r else {}

    def monomial(self, residue: int, exponent: int):
        r = residue % self.p
        return {exponent: r} if r else {}

    def add(self, a, b):
        out = dict(a)
        for k, c in b.items():
            r = (out.get(k, 0) + c) % self.p
            if r:
                out[k] = r
            else:
                out.pop(k, None)
        return out

    def neg(self, a):
        return {k: (-c) % self.p for k, c in a.items()}

    def mul(self, a, b):
        out: dict = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = ka + kb
                r = (out.get(k, 0) + ca * cb) % self.p
                if r:
                    out[k] = r
                else:
                    out.pop(k, None)
        return out

    def is_zero(self, a) -> bool:
        return not a

    def canonical(self, a):
        return {int(k): int(c) % self.p for k, c in a.items() if int(c) % self.p}

    def invert(self, a):
        if len(a) != 1:
            raise ZeroDivisionError("only monomials in v are units")
        ((k, c),) = a.items()
        return {-k: pow(c, self.p - 2, self.p)}

    def term_degrees(self, a):
        return [k * self.v_degree for k in a]

    def render(self, a) -> str:
        if not a:
            return "0"
        pieces = []
        for k in sorted(a):
            c = a[k]
            if k == 0:
                pieces.append(str(c))
            else:
                vpart = "v" if k == 1 else f"v^{k}"
                pieces.append(vpart if c == 1 else f"{c}*{vpart}")
        return " + ".join(pieces)

    def parse(self, s: str):
        out: dict = {}
        for term in s.strip().replace(" - ", " + -").split(" + "):
            term = term.strip()
            if not term:
                raise SchemaError(f"cannot parse Laurent value {s!r}")
            coeff = 1
            if term.startswith("-"):
                coeff = -1
                term = term[1:]
            exponent = 0
            saw_v = False
            for factor in term.split("*"):
                factor = factor.strip()
                if _INT_RE.match(factor):
                    coeff *= int(factor)
                    continue
                m = _NAME_POW_RE.match(factor)
                if not m or m.group(1) != "v" or saw_v:
                    raise SchemaError(f"cannot parse Laurent value {s!r}")
                saw_v = True
                exponent = int(m.group(2)) if m.group(2) is not None else 1
            r = (out.get(exponent, 0) + coeff) % self.p
            if r:
                out[exponent] = r
            else:
                out.pop(exponent, None)
        return out

    def to_json(self):
        return {"kind": "laurent", "p": self.p, "n": self.n, "grading": self.grading}


@dataclass(frozen=True)
class PolynomialRing(GradedRing):
    """base[g_1, ..., g_k] with commuting generators of even degree.

    Values are dicts {exponent tuple: nonzero base value}.
    """

    base: GradedRing = RationalRing()
    generators: tuple = ()  # tuple of (name, even degree)
    grading: str = GRADING_Z

    def __post_init__(self):
        names = [g[0] for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be distinct")
        for name, deg in self.generators:
            if deg % 2 != 0:
                raise ValueError(f"generator {name} has odd degree {deg}")
        if isinstance(self.base, (LaurentRing, PolynomialRing)):
            raise ValueError("polynomial extensions require a scalar base ring")

    @property
    def names(self):
        return tuple(g[0] for g in self.generators)

    def zero(self):
        return {}

    def one(self):
        k = len(self.generators)
        return {(0,) * k: self.base.one()}

    def from_int(self, v: int):
        b = self.base.from_int(v)
        if self.base.is_zero(b):
            return {}
        return {(0,) * len(self.generators): b}

    def generator(self, name: str):
        i = self.names.index(name)
        exps = tuple(1 if j == i else 0 for j in range(len(self.generators)))
        return {exps: self.base.one()}

    def add(self, a, b):
        out = dict(a)
        for e, c in b.items():
            s = self.base.add(out.get(e, self.base.zero()), c)
            if self.base.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return out

    def neg(self, a):
        return {e: self.base.neg(c) for e, c in a.items()}

    def mul(self, a, b):
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = self.base.add(out.get(e, self.base.zero()), self.base.mul(ca, cb))
                if self.base.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return out

    def is_zero(self, a) -> bool:
        return not a

    def canonical(self, a):
        out = {}
        for e, c in a.items():
            c = self.base.canonical(c)
            if not self.base.is_zero(c):
                out[tuple(int(x) for x in e)] = c
        return out

    def invert(self, a):
        if len(a) != 1:
            raise ZeroDivisionError("not a unit")
        ((e, c),) = a.items()
        if any(e):
            raise ZeroDivisionError("generators are not invertible")
        return {e: self.base.invert(c)}

    def term_degrees(self, a):
        degs = []
        for e, c in a.items():
            d = sum(x * g[1] for x, g in zip(e, self.generators))
            degs.append(d + self.base.degree_of(c))
        return degs

    def _render_monomial(self, e) -> str:
        parts = []
        for (name, _), x in zip(self.generators, e):
            if x == 1:
                parts.append(name)
            elif x > 1:
                parts.append(f"{name}^{x}")
        return "*".join(parts)

    def render(self, a) -> str:
        if not a:
            return "0"
        pieces = []
        for e in sorted(a, key=_monomial_sort_key):
            c = a[e]
            cs = self.base.render(c)
            negative = cs.startswith("-")
            if negative:
                cs = cs[1:]
            mon = self._render_monomial(e)
            if not mon:
                body = cs
            elif cs == "1":
                body = mon
            else:
                body = f"{cs}*{mon}"
            if not pieces:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f" - {body}" if negative else f" + {body}")
        return "".join(pieces)

    def parse(self, s: str):
        out: dict = {}
        k = len(self.generators)
        for term in s.strip().replace(" - ", " + -").split(" + "):
            term = term.strip()
            if not term:
                raise SchemaError(f"cannot parse polynomial value {s!r}")
            sign = False
            if term.startswith("-"):
                sign = True
                term = term[1:].strip()
            scalar = self.base.one()
            exps = [0] * k
            for factor in term.split("*"):
                factor = factor.strip()
                if _INT_RE.match(factor) or _FRAC_RE.match(factor):
                    scalar = self.base.mul(scalar, self.base.parse(factor))
                    continue
                m = _NAME_POW_RE.match(factor)
                if not m or m.group(1) not in self.names:
                    raise SchemaError(f"unknown factor {factor!r} in {s!r}")
                exps[self.names.index(m.group(1))] += int(m.group(2) or 1)
            if sign:
                scalar = self.base.neg(scalar)
            e = tuple(exps)
            sval = self.base.add(out.get(e, self.base.zero()), scalar)
            if self.base.is_zero(sval):
                out.pop(e, None)
            else:
                out[e] = sval
        return out

    def to_json(self):
        return {
            "kind": "polynomial",
            "base": self.base.to_json(),
            "generators": [[name, deg] for name, deg in self.generators],
            "grading": self.grading,
        }


def ring_from_json(obj) -> GradedRing:
    try:
        kind = obj["kind"]
        grading = obj.get("grading", GRADING_Z)
        if kind == "rationals":
            return RationalRing(grading)
        if kind == "integers":
            return IntegerRing(grading)
        if kind == "prime_field":
            return PrimeFieldRing(obj["p"], grading)
        if kind == "laurent":
            return LaurentRing(obj["p"], obj["n"], grading)
        if kind == "polynomial":
            base = ring_from_json(obj["base"])
            gens = tuple((g[0], int(g[1])) for g in obj["generators"])
            return PolynomialRing(base, gens, grading)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed ring description: {exc}") from exc
    raise SchemaError(f"unknown ring kind {obj.get('kind')!r}")


class GradedCoefficient:
    """A homogeneous element of a graded ring together with its degree.

    The degree is determined by the value (zero is degree-polymorphic
    and reported as degree 0); passing ``degree`` to the constructor
    asserts the expected value.
    """

    __slots__ = ("ring", "value")

    def __init__(self, ring: GradedRing, value, degree: int | None = None):
        value = ring.canonical(value)
        if not ring.is_homogeneous(value):
            raise DegreeMismatch(f"value {ring.render(value)!r} is not homogeneous")
        self.ring = ring
        self.value = value
        if degree is not None and not ring.is_zero(value):
            if not ring.degrees_equal(ring.degree_of(value), degree):
                raise DegreeMismatch(
                    f"value {ring.render(value)!r} has degree "
                    f"{ring.degree_of(value)}, expected {ring.reduce_degree(degree)}"
                )

    @property
    def degree(self) -> int:
        return self.ring.degree_of(self.value)

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.value)

    def _check_ring(self, other: "GradedCoefficient"):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def __add__(self, other: "GradedCoefficient") -> "GradedCoefficient":
        self._check_ring(other)
        if not self.is_zero() and not other.is_zero():
            if self.degree != other.degree:
                raise DegreeMismatch(
                    f"adding degrees {self.degree} and {other.degree}"
                )
        return GradedCoefficient(self.ring, self.ring.add(self.value, other.value))

    def __neg__(self) -> "GradedCoefficient":
        return GradedCoefficient(self.ring, self.ring.neg(self.value))

    def __sub__(self, other: "GradedCoefficient") -> "GradedCoefficient":
        return self + (-other)

    def __mul__(self, other: "GradedCoefficient") -> "GradedCoefficient":
        self._check_ring(other)
        return GradedCoefficient(self.ring, self.ring.mul(self.value, other.value))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedCoefficient):
            return NotImplemented
        return self.ring == other.ring and self.value == other.value

    def __repr__(self) -> str:
        return f"GradedCoefficient({self.render()!r}, degree={self.degree})"

    def render(self) -> str:
        return self.ring.render(self.value)

    @classmethod
    def parse(cls, ring: GradedRing, s: str, degree: int | None = None):
        return cls(ring, ring.parse(s), degree)


def p_valuation(a: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    if a == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = a.numerator, a.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def is_p_integral(a: Fraction, p: int) -> bool:
    return Fraction(a).denominator % p != 0


def reduce_mod_p(a: Fraction, p: int) -> int:
    """Image of a p-integral rational in F_p.

    Raises ``NotPIntegral`` (carrying the offending valuation) when the
    denominator is divisible by p.
    """
    a = Fraction(a)
    if a.denominator % p == 0:
        raise NotPIntegral(f"{a} is not {p}-integral", valuation=p_valuation(a, p))
    return a.numerator * pow(a.denominator, -1, p) % p


def coerce_value(src: GradedRing, dst: GradedRing, value):
    """Map a value along the canonical ring homomorphism src -> dst.

    Supports identity maps, Z -> anything, and Q -> Q / F_p (the latter
    only on p-integral inputs).  Anything else is a RingMismatch.
    """
    if src == dst:
        return value
    if isinstance(src, IntegerRing):
        return dst.from_int(value)
    if isinstance(src, RationalRing):
        if isinstance(dst, RationalRing):
            return value
        if isinstance(dst, PrimeFieldRing):
            return reduce_mod_p(value, dst.p)
    raise RingMismatch(f"no canonical map from {src} to {dst}")


RATIONALS = RationalRing()
INTEGERS = IntegerRing()
