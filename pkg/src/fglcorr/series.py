"""Sparse truncated multivariate power series.

A :class:`TruncatedSeries` stores finitely many terms of a power series
over an ordered variable set, truncated by total degree (exclusive
bound).  Storage is a sparse map from exponent tuples to raw ring
values; no zero coefficients are kept, and the canonical term order is
graded lexicographic with earlier variables first.

The variable order is significant: downstream code uses it to encode
the total order on boundary divisors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ContextMismatch,
    NonUnitLinearTerm,
    NonzeroConstantTerm,
    OutOfTruncation,
    SchemaError,
)
from .rings import GradedCoefficient, GradedRing, _monomial_sort_key, ring_from_json

Monomial = tuple  # exponent tuple aligned with a VariableContext


def total_degree(monomial: Monomial) -> int:
    return sum(monomial)


def support(monomial: Monomial):
    return tuple(i for i, e in enumerate(monomial) if e > 0)


@dataclass(frozen=True)
class VariableContext:
    """Ordered variable names with per-variable even degrees (default 2)."""

    names: tuple
    degrees: tuple = field(default=())

    def __post_init__(self):
        names = tuple(self.names)
        degrees = tuple(self.degrees) if self.degrees else (2,) * len(names)
        if len(set(names)) != len(names):
            raise ContextMismatch(f"duplicate variable names in {names}")
        if len(degrees) != len(names):
            raise ContextMismatch("degree list does not match variable list")
        for d in degrees:
            if d % 2 != 0:
                raise ContextMismatch(f"variable degree {d} is odd")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "degrees", degrees)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ContextMismatch(f"unknown variable {name!r}") from None

    def degree(self, name: str) -> int:
        return self.degrees[self.index(name)]

    def extend(self, names, degrees=None) -> "VariableContext":
        names = tuple(names)
        degrees = tuple(degrees) if degrees is not None else (2,) * len(names)
        return VariableContext(self.names + names, self.degrees + degrees)

    def to_json(self):
        return {"names": list(self.names), "degrees": list(self.degrees)}

    @staticmethod
    def from_json(obj) -> "VariableContext":
        try:
            return VariableContext(tuple(obj["names"]), tuple(obj["degrees"]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed context: {exc}") from exc


class TruncatedSeries:
    """A power series truncated at a total-degree bound (exclusive).

    All operations are exact on the retained range and saturate at the
    truncation order; binary operations use the minimum of the operand
    truncations.  Instances are immutable in intent: operations allocate
    fresh results, so values may be shared across threads freely.
    """

    __slots__ = ("context", "ring", "truncation", "_terms", "homogeneity")

    def __init__(self, context, ring, truncation, terms=None, homogeneity=None):
        if truncation < 1:
            raise OutOfTruncation(f"truncation order {truncation} must be >= 1")
        self.context = context
        self.ring = ring
        self.truncation = int(truncation)
        clean = {}
        for mon, val in (terms or {}).items():
            mon = tuple(int(e) for e in mon)
            if len(mon) != len(context):
                raise ContextMismatch(f"monomial {mon} does not fit context")
            if any(e < 0 for e in mon):
                raise ContextMismatch(f"negative exponent in {mon}")
            if total_degree(mon) >= truncation:
                continue
            val = ring.canonical(val)
            if not ring.is_zero(val):
                clean[mon] = val
        self._terms = clean
        self.homogeneity = None
        if homogeneity is not None:
            homogeneity = ring.reduce_degree(homogeneity)
            for mon, val in clean.items():
                d = ring.degree_of(val) + sum(
                    e * vd for e, vd in zip(mon, context.degrees)
                )
                if not ring.degrees_equal(d, homogeneity):
                    raise ContextMismatch(
                        f"term {mon} has degree {d}, expected {homogeneity}"
                    )
            self.homogeneity = homogeneity

    # ---------------- constructors ----------------

    @classmethod
    def zero(cls, context, ring, truncation):
        return cls(context, ring, truncation)

    @classmethod
    def from_scalar(cls, context, ring, truncation, value):
        zero_mon = (0,) * len(context)
        return cls(context, ring, truncation, {zero_mon: value})

    @classmethod
    def one(cls, context, ring, truncation):
        return cls.from_scalar(context, ring, truncation, ring.one())

    @classmethod
    def variable(cls, context, ring, truncation, name):
        i = context.index(name)
        mon = tuple(1 if j == i else 0 for j in range(len(context)))
        return cls(context, ring, truncation, {mon: ring.one()})

    # ---------------- inspection ----------------

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self):
        return self._terms.get((0,) * len(self.context), self.ring.zero())

    def sorted_monomials(self):
        return sorted(self._terms, key=_monomial_sort_key)

    def terms(self):
        """Terms in canonical order as (monomial, GradedCoefficient) pairs."""
        for mon in self.sorted_monomials():
            yield mon, GradedCoefficient(self.ring, self._terms[mon])

    def coefficient_of(self, monomial) -> GradedCoefficient:
        monomial = tuple(int(e) for e in monomial)
        if len(monomial) != len(self.context):
            raise ContextMismatch(f"monomial {monomial} does not fit context")
        if total_degree(monomial) >= self.truncation:
            raise OutOfTruncation(
                f"monomial {monomial} has degree >= truncation {self.truncation}"
            )
        return GradedCoefficient(
            self.ring, self._terms.get(monomial, self.ring.zero())
        )

    def used_variables(self):
        used = set()
        for mon in self._terms:
            used.update(self.context.names[i] for i in support(mon))
        return used

    def max_exponent(self, name: str) -> int:
        i = self.context.index(name)
        return max((mon[i] for mon in self._terms), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.context == other.context
            and self.ring == other.ring
            and self.truncation == other.truncation
            and self._terms == other._terms
        )

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.render()!r}, O(deg {self.truncation}))"

    # ---------------- arithmetic ----------------

    def _check_compatible(self, other: "TruncatedSeries"):
        if self.context != other.context:
            raise ContextMismatch(
                f"contexts {self.context.names} vs {other.context.names}"
            )
        if self.ring != other.ring:
            raise ContextMismatch("series over different rings")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compatible(other)
        trunc = min(self.truncation, other.truncation)
        terms = dict(self._terms)
        for mon, val in other._terms.items():
            s = self.ring.add(terms.get(mon, self.ring.zero()), val)
            if self.ring.is_zero(s):
                terms.pop(mon, None)
            else:
                terms[mon] = s
        h = self.homogeneity if self.homogeneity == other.homogeneity else None
        return TruncatedSeries(self.context, self.ring, trunc, terms, h)

    def __neg__(self) -> "TruncatedSeries":
        terms = {mon: self.ring.neg(val) for mon, val in self._terms.items()}
        return TruncatedSeries(
            self.context, self.ring, self.truncation, terms, self.homogeneity
        )

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compatible(other)
        trunc = min(self.truncation, other.truncation)
        a, b = self._terms, other._terms
        if len(a) > len(b):
            a, b = b, a
        ring = self.ring
        out: dict = {}
        for ma, va in a.items():
            da = total_degree(ma)
            for mb, vb in b.items():
                if da + total_degree(mb) >= trunc:
                    continue
                mon = tuple(x + y for x, y in zip(ma, mb))
                s = ring.add(out.get(mon, ring.zero()), ring.mul(va, vb))
                if ring.is_zero(s):
                    out.pop(mon, None)
                else:
                    out[mon] = s
        h = None
        if self.homogeneity is not None and other.homogeneity is not None:
            h = self.homogeneity + other.homogeneity
        return TruncatedSeries(self.context, self.ring, trunc, out, h)

    def scale(self, coefficient) -> "TruncatedSeries":
        """Multiply by a scalar from the coefficient ring."""
        if isinstance(coefficient, GradedCoefficient):
            if coefficient.ring != self.ring:
                raise ContextMismatch("scalar from a different ring")
            value = coefficient.value
        elif isinstance(coefficient, int):
            value = self.ring.from_int(coefficient)
        else:
            value = self.ring.canonical(coefficient)
        if self.ring.is_zero(value):
            return TruncatedSeries.zero(self.context, self.ring, self.truncation)
        terms = {m: self.ring.mul(value, v) for m, v in self._terms.items()}
        h = None
        if self.homogeneity is not None:
            h = self.homogeneity + self.ring.degree_of(value)
        return TruncatedSeries(self.context, self.ring, self.truncation, terms, h)

    def truncate(self, new_truncation: int) -> "TruncatedSeries":
        if new_truncation > self.truncation:
            raise OutOfTruncation(
                f"cannot extend truncation {self.truncation} to {new_truncation}"
            )
        return TruncatedSeries(
            self.context, self.ring, new_truncation, self._terms, self.homogeneity
        )

    # ---------------- structural maps ----------------

    def with_context(self, new_context: VariableContext) -> "TruncatedSeries":
        """Re-express the series over another context, matching variables by name.

        Every variable that actually occurs must exist in the new
        context with the same degree; unused variables may be dropped.
        """
        mapping = {}
        for i, name in enumerate(self.context.names):
            if name in new_context.names:
                j = new_context.index(name)
                if new_context.degrees[j] != self.context.degrees[i]:
                    raise ContextMismatch(f"variable {name!r} changes degree")
                mapping[i] = j
        terms = {}
        for mon, val in self._terms.items():
            new_mon = [0] * len(new_context)
            for i, e in enumerate(mon):
                if e == 0:
                    continue
                if i not in mapping:
                    raise ContextMismatch(
                        f"variable {self.context.names[i]!r} missing from target"
                    )
                new_mon[mapping[i]] = e
            terms[tuple(new_mon)] = val
        return TruncatedSeries(
            new_context, self.ring, self.truncation, terms, self.homogeneity
        )

    def rename(self, mapping: dict) -> "TruncatedSeries":
        """Simultaneously rename variables; order and exponents unchanged."""
        new_names = tuple(mapping.get(n, n) for n in self.context.names)
        ctx = VariableContext(new_names, self.context.degrees)
        return TruncatedSeries(
            ctx, self.ring, self.truncation, self._terms, self.homogeneity
        )

    def set_to_zero(self, names) -> "TruncatedSeries":
        """Substitute 0 for the given variables."""
        idx = {self.context.index(n) for n in names}
        terms = {
            mon: val
            for mon, val in self._terms.items()
            if all(mon[i] == 0 for i in idx)
        }
        return TruncatedSeries(
            self.context, self.ring, self.truncation, terms, self.homogeneity
        )

    # ---------------- composition ----------------

    def substitute(self, assignments: dict) -> "TruncatedSeries":
        """Compose: replace variables by series with zero constant term.

        Assigned values must be TruncatedSeries over a common context
        (or the integer 0); unassigned variables pass through by name
        into that context.  The result is exact up to the minimum of the
        truncation orders involved.
        """
        series_values = [
            v for v in assignments.values() if isinstance(v, TruncatedSeries)
        ]
        target_ctx = series_values[0].context if series_values else self.context
        trunc = self.truncation
        for v in series_values:
            if v.context != target_ctx:
                raise ContextMismatch("assigned series over different contexts")
            if v.ring != self.ring:
                raise ContextMismatch("assigned series over a different ring")
            if not v.ring.is_zero(v.constant_term()):
                raise NonzeroConstantTerm(
                    "substituted series must have zero constant term"
                )
            trunc = min(trunc, v.truncation)

        ring = self.ring
        one = TruncatedSeries.one(target_ctx, ring, trunc)

        # plan: pass-through variables shift exponents directly, assigned
        # series go through cached powers
        plan = []
        for name in self.context.names:
            if name in assignments:
                v = assignments[name]
                if isinstance(v, TruncatedSeries):
                    plan.append(("series", v.truncate(trunc)))
                elif v == 0:
                    plan.append(("zero", None))
                else:
                    raise ContextMismatch(
                        f"assignment for {name!r} must be a series or 0"
                    )
            else:
                plan.append(("var", target_ctx.index(name)))

        powers: list = [{0: one} for _ in plan]

        def power(i: int, k: int) -> TruncatedSeries:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * plan[i][1]
            return cache[k]

        out: dict = {}
        for mon, val in self._terms.items():
            shift = [0] * len(target_ctx)
            shift_deg = 0
            sprod = None
            dead = False
            for i, e in enumerate(mon):
                if e == 0:
                    continue
                kind, payload = plan[i]
                if kind == "zero":
                    dead = True
                    break
                if kind == "var":
                    shift[payload] += e
                    shift_deg += e
                else:
                    p = power(i, e)
                    sprod = p if sprod is None else sprod * p
                    if sprod.is_zero():
                        dead = True
                        break
            if dead or shift_deg >= trunc:
                continue
            if sprod is None:
                mon_out = tuple(shift)
                s = ring.add(out.get(mon_out, ring.zero()), val)
                if ring.is_zero(s):
                    out.pop(mon_out, None)
                else:
                    out[mon_out] = s
                continue
            for pm, pv in sprod._terms.items():
                if total_degree(pm) + shift_deg >= trunc:
                    continue
                mon_out = tuple(a + b for a, b in zip(pm, shift))
                s = ring.add(out.get(mon_out, ring.zero()), ring.mul(val, pv))
                if ring.is_zero(s):
                    out.pop(mon_out, None)
                else:
                    out[mon_out] = s
        return TruncatedSeries(target_ctx, ring, trunc, out)

    def reversion(self, name: str) -> "TruncatedSeries":
        """Compositional inverse of a univariate series.

        Requires zero constant term and a unit linear coefficient; the
        result t satisfies self(t(x)) = x = t(self(x)) up to truncation.
        """
        i = self.context.index(name)
        for mon in self._terms:
            if any(e > 0 and j != i for j, e in enumerate(mon)):
                raise ContextMismatch(f"series is not univariate in {name!r}")
        if not self.ring.is_zero(self.constant_term()):
            raise NonzeroConstantTerm("reversion needs zero constant term")
        lin = tuple(1 if j == i else 0 for j in range(len(self.context)))
        a1 = self._terms.get(lin, self.ring.zero())
        try:
            inv = self.ring.invert(a1)
        except ZeroDivisionError as exc:
            raise NonUnitLinearTerm(str(exc)) from exc

        def mono(k: int):
            return tuple(k if j == i else 0 for j in range(len(self.context)))

        terms = {mono(1): inv}
        for k in range(2, self.truncation):
            t = TruncatedSeries(self.context, self.ring, k + 1, terms)
            composed = self.truncate(k + 1).substitute({name: t})
            residue = composed._terms.get(mono(k), self.ring.zero())
            if not self.ring.is_zero(residue):
                terms[mono(k)] = self.ring.neg(self.ring.mul(inv, residue))
        return TruncatedSeries(self.context, self.ring, self.truncation, terms)

    # ---------------- rendering / serialization ----------------

    def render(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for mon in self.sorted_monomials():
            cs = self.ring.render(self._terms[mon])
            negative = cs.startswith("-") and " " not in cs
            if negative:
                cs = cs[1:]
            factors = []
            for name, e in zip(self.context.names, mon):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            monstr = "*".join(factors)
            if not monstr:
                body = f"({cs})" if " " in cs else cs
            elif cs == "1":
                body = monstr
            elif " " in cs:
                body = f"({cs})*{monstr}"
            else:
                body = f"{cs}*{monstr}"
            if not pieces:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f" - {body}" if negative else f" + {body}")
        return "".join(pieces)

    def to_json(self):
        return {
            "ring": self.ring.to_json(),
            "context": self.context.to_json(),
            "truncation": self.truncation,
            "terms": [
                [list(mon), self.ring.render(self._terms[mon])]
                for mon in self.sorted_monomials()
            ],
        }

    @staticmethod
    def from_json(obj) -> "TruncatedSeries":
        try:
            ring = ring_from_json(obj["ring"])
            ctx = VariableContext.from_json(obj["context"])
            trunc = int(obj["truncation"])
            terms = {
                tuple(int(e) for e in mon): ring.parse(cs)
                for mon, cs in obj["terms"]
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed series document: {exc}") from exc
        return TruncatedSeries(ctx, ring, trunc, terms)
