"""Formal group laws: construction, n-series, multi-sums, inverses.

A law is stored as its coefficient table a_ij (i + j bounded), verified
at construction to be unital, commutative, associative up to the bound,
and homogeneous for the grading in which the series variables sit in
degree 2 and a_ij in degree 2 - 2i - 2j.

Four families are bundled: the additive law, the multiplicative law
L(x, y) = x + y - xy over the Z/2-graded integers, the height-n p-typical
laws built from the logarithm sum_i p^-i x^(p^(n*i)) by inversion and
reduction mod p, and a generic-logarithm law over Q[m_1, m_2, ...] with
deg(m_i) = -2i.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    BoundExceeded,
    ContextMismatch,
    GradingFailure,
    IntegralityFailure,
    NotPIntegral,
    SchemaError,
)
from .rings import (
    GRADING_Z2,
    GradedCoefficient,
    GradedRing,
    IntegerRing,
    LaurentRing,
    PolynomialRing,
    RationalRing,
    is_prime,
    reduce_mod_p,
    ring_from_json,
)
from .series import TruncatedSeries, VariableContext


class FormalGroupLaw:
    """A one-dimensional commutative formal group law up to a degree bound."""

    def __init__(self, ring: GradedRing, degree_bound: int, coefficients,
                 name: str = "custom", check: bool = True):
        if degree_bound < 2:
            raise BoundExceeded("degree bound must be at least 2")
        self.ring = ring
        self.degree_bound = int(degree_bound)
        self.name = name
        table: dict = {}
        for (i, j), val in coefficients.items():
            if isinstance(val, GradedCoefficient):
                val = val.value
            elif isinstance(val, int):
                val = ring.from_int(val)
            val = ring.canonical(val)
            if ring.is_zero(val):
                continue
            if i < 0 or j < 0 or i + j < 1:
                raise SchemaError(f"bad coefficient index ({i}, {j})")
            if i + j > degree_bound:
                continue
            table[(int(i), int(j))] = val
        # symmetrize entries given only on one side of the diagonal
        for (i, j), val in list(table.items()):
            if (j, i) not in table:
                table[(j, i)] = val
        self.coefficients = table
        if check:
            self._validate()

    def coefficient(self, i: int, j: int) -> GradedCoefficient:
        return GradedCoefficient(
            self.ring, self.coefficients.get((i, j), self.ring.zero())
        )

    def _validate(self):
        ring = self.ring
        one = ring.one()
        if self.coefficients.get((1, 0)) != one:
            raise SchemaError("unitality fails: a_10 != 1")
        for (i, j), val in self.coefficients.items():
            if j == 0 and i >= 2:
                raise SchemaError(f"unitality fails: a_{i}0 != 0")
            if self.coefficients.get((j, i)) != val:
                raise SchemaError(f"commutativity fails at a_{i}{j}")
            expected = 2 - 2 * i - 2 * j
            if not ring.degrees_equal(ring.degree_of(val), expected):
                raise GradingFailure(
                    f"a_{i}{j} has degree {ring.degree_of(val)}, expected {expected}"
                )
        ctx = VariableContext(("x", "y", "z"))
        trunc = self.degree_bound + 1
        x = TruncatedSeries.variable(ctx, ring, trunc, "x")
        y = TruncatedSeries.variable(ctx, ring, trunc, "y")
        z = TruncatedSeries.variable(ctx, ring, trunc, "z")
        left = formal_sum(self, [formal_sum(self, [x, y], trunc), z], trunc)
        right = formal_sum(self, [x, formal_sum(self, [y, z], trunc)], trunc)
        if left != right:
            raise SchemaError(f"law {self.name!r} is not associative up to bound")

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalGroupLaw):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.degree_bound == other.degree_bound
            and self.coefficients == other.coefficients
        )

    def __hash__(self):
        return id(self)

    def __repr__(self) -> str:
        return f"FormalGroupLaw({self.name!r}, bound={self.degree_bound})"

    def coefficient_table(self):
        """Nonzero a_ij in canonical order (by total degree, then i)."""
        rows = []
        for (i, j) in sorted(self.coefficients, key=lambda ij: (sum(ij), ij[0])):
            rows.append((i, j, self.ring.render(self.coefficients[(i, j)])))
        return rows

    def to_json(self):
        return {
            "name": self.name,
            "ring": self.ring.to_json(),
            "degree_bound": self.degree_bound,
            "coefficients": [[i, j, s] for i, j, s in self.coefficient_table()],
        }

    @staticmethod
    def from_json(obj) -> "FormalGroupLaw":
        try:
            ring = ring_from_json(obj["ring"])
            coeffs = {
                (int(i), int(j)): ring.parse(s) for i, j, s in obj["coefficients"]
            }
            return FormalGroupLaw(
                ring, int(obj["degree_bound"]), coeffs, obj.get("name", "custom")
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed law document: {exc}") from exc


# ---------------- series-level operations ----------------


def _check_truncation(law: FormalGroupLaw, truncation: int):
    if truncation > law.degree_bound + 1:
        raise BoundExceeded(
            f"truncation {truncation} exceeds law bound {law.degree_bound} + 1"
        )


def two_var_sum(law: FormalGroupLaw, x: str, y: str, truncation: int,
                context: VariableContext | None = None) -> TruncatedSeries:
    """The series x +_L y = sum a_ij x^i y^j."""
    _check_truncation(law, truncation)
    ctx = context if context is not None else VariableContext((x, y))
    ix, iy = ctx.index(x), ctx.index(y)
    if x == y:
        raise ContextMismatch("two_var_sum needs distinct variables")
    terms = {}
    for (i, j), val in law.coefficients.items():
        mon = [0] * len(ctx)
        mon[ix], mon[iy] = i, j
        terms[tuple(mon)] = val
    h = 2 if ctx.degrees[ix] == ctx.degrees[iy] == 2 else None
    return TruncatedSeries(ctx, law.ring, truncation, terms, h)


def formal_sum(law: FormalGroupLaw, args, truncation: int,
               context: VariableContext | None = None) -> TruncatedSeries:
    """Left-nested formal sum L(s_1, ..., s_k) of series arguments."""
    args = list(args)
    if not args:
        if context is None:
            raise ContextMismatch("formal_sum of no arguments needs a context")
        return TruncatedSeries.zero(context, law.ring, truncation)
    _check_truncation(law, truncation)
    pattern = two_var_sum(law, "x", "y", truncation)
    acc = args[0].truncate(min(truncation, args[0].truncation))
    for nxt in args[1:]:
        acc = pattern.substitute({"x": acc, "y": nxt})
    return acc.truncate(min(truncation, acc.truncation))


def n_series(law: FormalGroupLaw, n: int, x: str, truncation: int,
             context: VariableContext | None = None) -> TruncatedSeries:
    """The n-fold formal sum [n]x; negative n goes through the inverse."""
    _check_truncation(law, truncation)
    ctx = context if context is not None else VariableContext((x,))
    if n == 0:
        return TruncatedSeries.zero(ctx, law.ring, truncation)
    if n < 0:
        base = formal_inverse(law, x, truncation, ctx)
        n = -n
    else:
        base = TruncatedSeries.variable(ctx, law.ring, truncation, x)
    acc = base
    for _ in range(n - 1):
        acc = formal_sum(law, [base, acc], truncation)
    return acc


def multi_sum(law: FormalGroupLaw, variables, multiplicities, truncation: int,
              context: VariableContext | None = None) -> TruncatedSeries:
    """The multi-sum [n_1] u_1 +_L ... +_L [n_m] u_m (left-nested fold)."""
    variables = list(variables)
    multiplicities = list(multiplicities)
    if len(variables) != len(multiplicities):
        raise ContextMismatch("one multiplicity per variable required")
    _check_truncation(law, truncation)
    ctx = context if context is not None else VariableContext(tuple(variables))
    args = [
        n_series(law, n, v, truncation, ctx)
        for v, n in zip(variables, multiplicities)
    ]
    return formal_sum(law, args, truncation, ctx)


def formal_inverse(law: FormalGroupLaw, x: str, truncation: int,
                   context: VariableContext | None = None) -> TruncatedSeries:
    """The series i(x) with L(x, i(x)) = 0 up to truncation."""
    _check_truncation(law, truncation)
    ctx = context if context is not None else VariableContext((x,))
    xs = TruncatedSeries.variable(ctx, law.ring, truncation, x)
    pattern = two_var_sum(law, "u", "w", truncation)
    # tail = L(u, w) - u - w collects the genuinely mixed terms
    uw = VariableContext(("u", "w"))
    tail = (
        pattern
        - TruncatedSeries.variable(uw, law.ring, truncation, "u")
        - TruncatedSeries.variable(uw, law.ring, truncation, "w")
    )
    y = -xs
    for _ in range(truncation - 1):
        y = -xs - tail.substitute({"u": xs, "w": y})
    if not formal_sum(law, [xs, y], truncation).is_zero():
        raise SchemaError("formal inverse iteration failed to converge")
    return y


# ---------------- bundled constructions ----------------


def additive_law(degree_bound: int) -> FormalGroupLaw:
    ring = IntegerRing()
    return FormalGroupLaw(
        ring, degree_bound, {(1, 0): 1, (0, 1): 1}, name="additive"
    )


def multiplicative_law(degree_bound: int) -> FormalGroupLaw:
    # a_11 = -1 sits in degree -2, so the integers are taken Z/2-graded
    ring = IntegerRing(grading=GRADING_Z2)
    return FormalGroupLaw(
        ring, degree_bound, {(1, 0): 1, (0, 1): 1, (1, 1): -1},
        name="multiplicative",
    )


def honda_law(p: int, n: int, degree_bound: int) -> FormalGroupLaw:
    """Height-n p-typical law over F_p[v, v^-1].

    Built from the logarithm sum_{i>=0} p^-i x^(p^(n i)) over Q: invert
    the logarithm, form log^-1(log x + log y), check every coefficient
    is p-integral, reduce mod p, and homogenize the coefficient of
    x^i y^j by v^((i+j-1)/(p^n-1)).  Nonzero coefficients may only
    appear when (p^n - 1) divides i + j - 1.
    """
    if not is_prime(p):
        raise SchemaError(f"{p} is not prime")
    if n < 1:
        raise SchemaError("height must be >= 1")
    rationals = RationalRing()
    trunc = degree_bound + 1
    ctx1 = VariableContext(("x",))
    log_terms = {}
    i = 0
    while p ** (n * i) <= degree_bound:
        log_terms[(p ** (n * i),)] = Fraction(1, p**i)
        i += 1
    log = TruncatedSeries(ctx1, rationals, trunc, log_terms)
    exp = log.reversion("x")

    ctx2 = VariableContext(("x", "y"))
    logxy_terms = {}
    for (k,), c in log_terms.items():
        logxy_terms[(k, 0)] = c
        logxy_terms[(0, k)] = c
    logxy = TruncatedSeries(ctx2, rationals, trunc, logxy_terms)
    law_q = exp.substitute({"x": logxy})

    period = p**n - 1
    ring = LaurentRing(p, n)
    coeffs = {}
    for mon, coeff in law_q._terms.items():
        i, j = mon
        try:
            residue = reduce_mod_p(coeff, p)
        except NotPIntegral as exc:
            raise IntegralityFailure(
                f"coefficient of x^{i} y^{j} is {coeff}, not {p}-integral "
                f"(valuation {exc.valuation})"
            ) from exc
        if residue == 0:
            continue
        if (i + j - 1) % period != 0:
            raise GradingFailure(
                f"nonzero coefficient at x^{i} y^{j} with "
                f"i+j-1 = {i + j - 1} not divisible by {period}"
            )
        coeffs[(i, j)] = {(i + j - 1) // period: residue}
    return FormalGroupLaw(ring, degree_bound, coeffs, name=f"honda({p},{n})")


def generic_log_law(num_generators: int, degree_bound: int) -> FormalGroupLaw:
    """Law with logarithm x + m_1 x^2 + ... over Q[m_1, ..., m_k]."""
    if num_generators < 1:
        raise SchemaError("need at least one generator")
    ring = PolynomialRing(
        RationalRing(),
        tuple((f"m{i}", -2 * i) for i in range(1, num_generators + 1)),
    )
    trunc = degree_bound + 1
    ctx1 = VariableContext(("x",))
    log_terms = {(1,): ring.one()}
    for i in range(1, num_generators + 1):
        log_terms[(i + 1,)] = ring.generator(f"m{i}")
    log = TruncatedSeries(ctx1, ring, trunc, log_terms)
    exp = log.reversion("x")

    ctx2 = VariableContext(("x", "y"))
    logxy_terms = {}
    for (k,), c in log_terms.items():
        logxy_terms[(k, 0)] = c
        logxy_terms[(0, k)] = c
    logxy = TruncatedSeries(ctx2, ring, trunc, logxy_terms)
    law_poly = exp.substitute({"x": logxy})
    coeffs = {mon: val for mon, val in law_poly._terms.items()}
    coeffs = {(i, j): v for (i, j), v in coeffs.items()}
    return FormalGroupLaw(
        ring, degree_bound, coeffs, name=f"generic_log({num_generators})"
    )


def construct_law(kind: str, degree_bound: int, p: int | None = None,
                  n: int | None = None,
                  num_generators: int | None = None) -> FormalGroupLaw:
    """Build one of the bundled laws by name."""
    kind = kind.replace("-", "_")
    if kind == "additive":
        return additive_law(degree_bound)
    if kind == "multiplicative":
        return multiplicative_law(degree_bound)
    if kind == "honda":
        if p is None or n is None:
            raise SchemaError("honda law needs p and n")
        return honda_law(p, n, degree_bound)
    if kind == "generic_log":
        k = num_generators if num_generators is not None else max(degree_bound - 1, 1)
        return generic_log_law(k, degree_bound)
    raise SchemaError(f"unknown law kind {kind!r}")


def parse_law_selector(selector: str, degree_bound: int) -> FormalGroupLaw:
    """Parse compact selectors: additive, multiplicative, honda:p,n,
    generic_log:k."""
    base, _, params = selector.partition(":")
    base = base.replace("-", "_")
    if base == "honda":
        try:
            p_s, n_s = params.split(",")
            return construct_law("honda", degree_bound, p=int(p_s), n=int(n_s))
        except ValueError as exc:
            raise SchemaError(f"bad honda selector {selector!r}") from exc
    if base == "generic_log":
        if params:
            try:
                return construct_law(
                    "generic_log", degree_bound, num_generators=int(params)
                )
            except ValueError as exc:
                raise SchemaError(f"bad selector {selector!r}") from exc
        return construct_law("generic_log", degree_bound)
    if params:
        raise SchemaError(f"law {base!r} takes no parameters")
    return construct_law(base, degree_bound)
