"""Correction series for multi-sums in divisor quotient rings.

The quotient ring of interest has ordered variables D_0, ..., D_N and
relations

    r_j = D_j^2 - D_j * L(-D_0, ..., -D_{j-1}, -D_{j+1}, ..., -D_N)

with L the formal sum of a group law (in the decorated variant two
extra variables S, T join the arguments of L positively and no relation
of their own).  In this quotient the multi-sum L(D_0, ..., D_N) can be
rewritten as sum_j D_j * f_j with each f_j a series in the variables
below j, and the f_j are specializations of a single series f with
constant term 1.

Rewriting is staged by the largest divisor index occurring in a
monomial: a top-index-j monomial with D_j-multiplicity one contributes
its cofactor to f_j, one with multiplicity k >= 2 is reduced using r_j,
which records the multiplier D_j^(k-2) * cofactor in an explicit
witness and redistributes the replacement terms (those reaching a
higher index are deferred to that later stage, so stages strictly
increase and the process terminates).  Every claimed identity is
certified by replaying the witness, never by a normal-form procedure:
naive exponent reduction does not terminate in this ring.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    ContextMismatch,
    NotDecorated,
    SchemaError,
    TruncationTooSmall,
)
from .fgl import FormalGroupLaw, formal_inverse, formal_sum
from .rings import _monomial_sort_key
from .series import TruncatedSeries, VariableContext, total_degree

LITERAL = "literal"
FORMAL_INVERSE = "formal_inverse"


_master_cache: dict = {}


def _master_sum(law: FormalGroupLaw, n: int, truncation: int) -> TruncatedSeries:
    """Cached multi-sum L(x_0, ..., x_{n-1}) on anonymous variables.

    Every relation series is a specialization of this one: setting a
    variable to zero drops it from the fold (unitality), so the sums
    omitting one variable come from the same master by term remapping.
    """
    key = (law, n, truncation)
    if key not in _master_cache:
        names = tuple(f"_x{i}" for i in range(n))
        ctx = VariableContext(names)
        if n == 0:
            s = TruncatedSeries.zero(ctx, law.ring, truncation)
        else:
            prev = _master_sum(law, n - 1, truncation).with_context(ctx)
            last = TruncatedSeries.variable(ctx, law.ring, truncation, names[-1])
            s = last if n == 1 else formal_sum(law, [prev, last], truncation, ctx)
        _master_cache[key] = s
    return _master_cache[key]


def _remap_master(master, context, ring, truncation, slot_to_index,
                  zero_slots=(), negate_slots=()):
    """Specialize a master sum: zero some slots, rename and negate others."""
    zero_slots = set(zero_slots)
    negate_slots = set(negate_slots)
    terms = {}
    for mon, val in master._terms.items():
        if any(mon[p] for p in zero_slots):
            continue
        new_mon = [0] * len(context)
        parity = 0
        for p, e in enumerate(mon):
            if e == 0:
                continue
            new_mon[slot_to_index[p]] = e
            if p in negate_slots:
                parity += e
        terms[tuple(new_mon)] = ring.neg(val) if parity % 2 else val
    return TruncatedSeries(context, ring, truncation, terms)


class DivisorPresentation:
    """Variables, relations and truncation data for one quotient ring.

    ``negation`` selects what is fed to L for the other variables:
    ``literal`` plugs in -D_i exactly as the relation is usually
    written, ``formal_inverse`` plugs in the series i(D_i) inverting the
    group law, which is the first Chern class of the dual line bundle.
    The two agree for the additive law and differ in general.
    """

    def __init__(self, law: FormalGroupLaw, N: int, truncation: int,
                 decorated: bool = False, negation: str = LITERAL):
        if truncation < 2:
            raise TruncationTooSmall("correction needs truncation >= 2")
        if N < 0:
            raise SchemaError("N must be >= 0")
        if negation not in (LITERAL, FORMAL_INVERSE):
            raise SchemaError(f"unknown negation mode {negation!r}")
        self.law = law
        self.N = int(N)
        self.truncation = int(truncation)
        self.decorated = bool(decorated)
        self.negation = negation
        self.divisor_names = tuple(f"D{i}" for i in range(N + 1))
        names = (("S", "T") if decorated else ()) + self.divisor_names
        self.context = VariableContext(names)
        self._lambdas: list | None = None

    # -- derived series -------------------------------------------------

    def multi_sum(self) -> TruncatedSeries:
        master = _master_sum(self.law, self.N + 1, self.truncation)
        slot_to_index = {
            i: self.context.index(name)
            for i, name in enumerate(self.divisor_names)
        }
        return _remap_master(
            master, self.context, self.law.ring, self.truncation, slot_to_index
        )

    def lambdas(self) -> list:
        """The series L(...) appearing in each relation r_j."""
        if self._lambdas is None:
            self._lambdas = _relation_lambdas(
                self.law, self.context, self.divisor_names,
                self.truncation, self.decorated, self.negation,
            )
        return self._lambdas

    def relation(self, j: int) -> TruncatedSeries:
        dj = TruncatedSeries.variable(
            self.context, self.law.ring, self.truncation, self.divisor_names[j]
        )
        return dj * dj - dj * self.lambdas()[j]

    # -- bookkeeping ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, DivisorPresentation):
            return NotImplemented
        return (
            self.law == other.law
            and self.N == other.N
            and self.truncation == other.truncation
            and self.decorated == other.decorated
            and self.negation == other.negation
        )

    def __repr__(self) -> str:
        deco = ", decorated" if self.decorated else ""
        return (
            f"DivisorPresentation({self.law.name}, N={self.N}, "
            f"trunc={self.truncation}, {self.negation}{deco})"
        )

    def to_json(self):
        return {
            "law": self.law.to_json(),
            "N": self.N,
            "truncation": self.truncation,
            "decorated": self.decorated,
            "negation": self.negation,
        }

    @staticmethod
    def from_json(obj) -> "DivisorPresentation":
        try:
            return DivisorPresentation(
                FormalGroupLaw.from_json(obj["law"]),
                int(obj["N"]),
                int(obj["truncation"]),
                bool(obj["decorated"]),
                obj["negation"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed presentation: {exc}") from exc


_lambda_cache: dict = {}
_inverse_cache: dict = {}


def _law_inverse(law, truncation):
    key = (law, truncation)
    if key not in _inverse_cache:
        _inverse_cache[key] = formal_inverse(law, "x", truncation)
    return _inverse_cache[key]


def _relation_lambdas(law, context, divisor_names, truncation, decorated,
                      negation) -> list:
    # the canonical naming makes the lambdas a function of the key below
    key = (law, len(divisor_names), truncation, decorated, negation)
    cached = _lambda_cache.get(key)
    if cached is not None:
        return cached
    out = _relation_lambdas_uncached(
        law, context, divisor_names, truncation, decorated, negation
    )
    _lambda_cache[key] = out
    return out


def _relation_lambdas_uncached(law, context, divisor_names, truncation,
                               decorated, negation) -> list:
    ring = law.ring
    nd = len(divisor_names)
    offset = 2 if decorated else 0
    master = _master_sum(law, nd + offset, truncation)
    if negation == LITERAL:
        slot_to_index = {}
        if decorated:
            slot_to_index[0] = context.index("S")
            slot_to_index[1] = context.index("T")
        for i, name in enumerate(divisor_names):
            slot_to_index[offset + i] = context.index(name)
        negate = range(offset, offset + nd)
        return [
            _remap_master(master, context, ring, truncation, slot_to_index,
                          zero_slots=(offset + j,), negate_slots=negate)
            for j in range(nd)
        ]
    inv = _law_inverse(law, truncation)
    args = {
        f"_x{offset + i}": inv.rename({"x": name}).with_context(context)
        for i, name in enumerate(divisor_names)
    }
    if decorated:
        args["_x0"] = TruncatedSeries.variable(context, ring, truncation, "S")
        args["_x1"] = TruncatedSeries.variable(context, ring, truncation, "T")
    out = []
    for j in range(nd):
        assignment = dict(args)
        assignment[f"_x{offset + j}"] = 0
        out.append(master.substitute(assignment))
    return out


@dataclass(frozen=True)
class RewriteWitness:
    """Multipliers g_j with sum_j g_j * r_j certifying a rewrite.

    Replaying the witness (adding sum g_j r_j to the claimed normal
    form) reproduces the original series exactly up to truncation.
    """

    entries: tuple  # of (relation index, TruncatedSeries)

    def is_empty(self) -> bool:
        return not self.entries

    def replay(self, presentation: DivisorPresentation) -> TruncatedSeries:
        total = TruncatedSeries.zero(
            presentation.context, presentation.law.ring, presentation.truncation
        )
        for j, g in self.entries:
            total = total + g * presentation.relation(j)
        return total

    def to_json(self):
        return [[j, g.to_json()] for j, g in self.entries]

    @staticmethod
    def from_json(obj) -> "RewriteWitness":
        return RewriteWitness(
            tuple((int(j), TruncatedSeries.from_json(doc)) for j, doc in obj)
        )


@dataclass(frozen=True)
class IdentityVerdict:
    ok: bool
    offending_monomial: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


class CorrectionSeries:
    """Output of the staged rewriting: f, its stage specializations, witness."""

    def __init__(self, presentation: DivisorPresentation, f: TruncatedSeries,
                 per_stage, witness: RewriteWitness):
        self.presentation = presentation
        self.f = f
        self.per_stage = list(per_stage)
        self.witness = witness

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrectionSeries):
            return NotImplemented
        return (
            self.presentation == other.presentation
            and self.f == other.f
            and self.per_stage == other.per_stage
            and self.witness == other.witness
        )

    def to_json(self):
        return {
            "presentation": self.presentation.to_json(),
            "f": self.f.to_json(),
            "stages": [s.to_json() for s in self.per_stage],
            "witness": self.witness.to_json(),
        }

    @staticmethod
    def from_json(obj) -> "CorrectionSeries":
        try:
            return CorrectionSeries(
                DivisorPresentation.from_json(obj["presentation"]),
                TruncatedSeries.from_json(obj["f"]),
                [TruncatedSeries.from_json(doc) for doc in obj["stages"]],
                RewriteWitness.from_json(obj["witness"]),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed correction document: {exc}") from exc


def _staged_rewrite(law, context, divisor_names, lambdas, source,
                    truncation, shuffle=None):
    """Run the rewriting algorithm on ``source``.

    Returns (stage coefficient dicts, witness dicts), both lists indexed
    by stage.  ``shuffle`` optionally reorders within-stage processing;
    the output provably does not depend on it (contributions are
    additive per monomial), and tests assert as much.
    """
    ring = law.ring
    d_idx = [context.index(name) for name in divisor_names]
    nstages = len(d_idx)

    def top_stage(mon) -> int:
        for s in range(nstages - 1, -1, -1):
            if mon[d_idx[s]] > 0:
                return s
        return -1

    pending = [dict() for _ in range(nstages)]

    def add(bucket, mon, val):
        acc = ring.add(bucket.get(mon, ring.zero()), val)
        if ring.is_zero(acc):
            bucket.pop(mon, None)
        else:
            bucket[mon] = acc

    for mon, val in source._terms.items():
        s = top_stage(mon)
        assert s >= 0, "multi-sum monomial without divisor variable"
        add(pending[s], mon, val)

    stages = [dict() for _ in range(nstages)]
    witness = [dict() for _ in range(nstages)]
    for s in range(nstages):
        bucket = pending[s]
        di = d_idx[s]
        lam = lambdas[s]
        while bucket:
            if shuffle is None:
                mon = min(bucket, key=_monomial_sort_key)
            else:
                mon = shuffle(list(bucket))
            val = bucket.pop(mon)
            k = mon[di]
            if k == 1:
                phi = tuple(0 if i == di else e for i, e in enumerate(mon))
                add(stages[s], phi, val)
                continue
            # one application of r_s: D^k phi = D^(k-1) Lam phi + D^(k-2) phi r_s
            lowered = tuple(k - 2 if i == di else e for i, e in enumerate(mon))
            add(witness[s], lowered, val)
            base = tuple(k - 1 if i == di else e for i, e in enumerate(mon))
            for lmon, lval in lam._terms.items():
                new_mon = tuple(a + b for a, b in zip(base, lmon))
                if total_degree(new_mon) >= truncation:
                    continue
                t = top_stage(new_mon)
                assert t >= s, "rewriting moved a term to an earlier stage"
                add(pending[t], new_mon, ring.mul(val, lval))
    return stages, witness


def _run_algorithm(law, N, truncation, decorated, negation, shuffle=None):
    names = tuple(f"D{i}" for i in range(N + 1))
    ctx_names = (("S", "T") if decorated else ()) + names
    context = VariableContext(ctx_names)
    lambdas = _relation_lambdas(law, context, names, truncation, decorated,
                                negation)
    master = _master_sum(law, N + 1, truncation)
    source = _remap_master(
        master, context, law.ring, truncation,
        {i: context.index(name) for i, name in enumerate(names)},
    )
    stages, witness = _staged_rewrite(
        law, context, names, lambdas, source, truncation, shuffle
    )
    to_series = lambda terms: TruncatedSeries(context, law.ring, truncation, terms)
    return ([to_series(t) for t in stages], [to_series(t) for t in witness],
            context)


def compute_correction(presentation: DivisorPresentation,
                       shuffle=None) -> CorrectionSeries:
    """Run the staged rewriting and package f, its stages and the witness.

    The series f itself is obtained from a run with one extra trailing
    variable: its last stage coefficient genuinely involves all of
    D_0, ..., D_N, and specializing trailing variables to zero recovers
    every per-stage series (asserted below, not assumed).

    A cofactor of degree d always rides a monomial D_j * phi of degree
    d + 1, so the stage series and f carry terms up to degree
    truncation - 2; that is exactly the precision the defining identity
    exercises at this truncation.
    """
    pres = presentation
    stages, witnesses, _ = _run_algorithm(
        pres.law, pres.N, pres.truncation, pres.decorated, pres.negation,
        shuffle,
    )
    extended_stages, _, _ = _run_algorithm(
        pres.law, pres.N + 1, pres.truncation, pres.decorated, pres.negation,
        shuffle,
    )
    f = extended_stages[pres.N + 1].with_context(pres.context)

    ring = pres.law.ring
    assert ring.is_zero(ring.sub(f.constant_term(), ring.one())), \
        "correction series must have constant term 1"
    for j in range(pres.N + 1):
        specialized = f.set_to_zero(pres.divisor_names[j:])
        assert specialized == stages[j], (
            f"stage {j} is not the expected specialization of f"
        )

    witness = RewriteWitness(
        tuple((j, g) for j, g in enumerate(witnesses) if not g.is_zero())
    )
    return CorrectionSeries(pres, f, stages, witness)


def verify_identity(c: CorrectionSeries) -> IdentityVerdict:
    """Replay the witness and check the defining identity exactly.

    Recomputes L(D_0, ..., D_N) - sum_j D_j f_j - sum_j g_j r_j as an
    honest truncated series; the verdict carries the first offending
    monomial (graded-lex order) when the residual is nonzero.
    """
    pres = c.presentation
    residual = pres.multi_sum()
    for j, fj in enumerate(c.per_stage):
        dj = TruncatedSeries.variable(
            pres.context, pres.law.ring, pres.truncation, pres.divisor_names[j]
        )
        residual = residual - dj * fj
    residual = residual - c.witness.replay(pres)
    if residual.is_zero():
        return IdentityVerdict(True)
    return IdentityVerdict(False, residual.sorted_monomials()[0])


def verify_correction(c: CorrectionSeries) -> IdentityVerdict:
    """Full check of a (possibly externally loaded) correction series.

    Validates the structural invariants (constant term 1, each stage is
    the matching specialization of f) and then replays the witness via
    :func:`verify_identity`.  Any tampered coefficient trips one of the
    three checks.
    """
    pres = c.presentation
    ring = pres.law.ring
    if not ring.is_zero(ring.sub(c.f.constant_term(), ring.one())):
        return IdentityVerdict(False, (0,) * len(pres.context))
    if len(c.per_stage) != pres.N + 1:
        return IdentityVerdict(False, (0,) * len(pres.context))
    for j in range(pres.N + 1):
        diff = c.f.set_to_zero(pres.divisor_names[j:]) - c.per_stage[j]
        if not diff.is_zero():
            return IdentityVerdict(False, diff.sorted_monomials()[0])
    return verify_identity(c)


def expand_F_in_S(c: CorrectionSeries) -> list:
    """Coefficients F_i of S^i in the decorated correction series."""
    pres = c.presentation
    if not pres.decorated:
        raise NotDecorated("expansion in S needs a decorated presentation")
    s_idx = pres.context.index("S")
    buckets: dict = {}
    for mon, val in c.f._terms.items():
        i = mon[s_idx]
        stripped = tuple(0 if k == s_idx else e for k, e in enumerate(mon))
        buckets.setdefault(i, {})[stripped] = val
    top = max(buckets, default=0)
    return [
        TruncatedSeries(pres.context, pres.law.ring, pres.truncation,
                        buckets.get(i, {}))
        for i in range(top + 1)
    ]


def assemble_corrected_class(c: CorrectionSeries, kind: str, inputs=None,
                             z_name: str = "z",
                             truncation: int | None = None) -> TruncatedSeries:
    """Symbolic correction factor for a virtual class.

    ``three_point`` returns f itself.  ``higher_genus`` takes a list of
    (input cotangent variable, pairing variable) pairs and returns

        sum_i F_i z^i * prod_j sum_k (tin_j w_j)^k

    over a context extending the presentation's by the new variables
    (the bookkeeping variables w_j and z sit in degree 0).
    """
    if kind == "three_point":
        return c.f
    if kind != "higher_genus":
        raise SchemaError(f"unknown assembly kind {kind!r}")
    pres = c.presentation
    if not pres.decorated:
        raise NotDecorated("higher-genus assembly needs a decorated presentation")
    inputs = list(inputs or [])
    trunc = truncation if truncation is not None else pres.truncation

    base_names = tuple(n for n in pres.context.names if n != "S")
    base_degrees = tuple(
        d for n, d in zip(pres.context.names, pres.context.degrees) if n != "S"
    )
    names = base_names
    degrees = base_degrees
    for tin, w in inputs:
        names += (tin, w)
        degrees += (2, 0)
    names += (z_name,)
    degrees += (0,)
    ctx = VariableContext(names, degrees)
    ring = pres.law.ring

    pieces = TruncatedSeries.zero(ctx, ring, trunc)
    z = TruncatedSeries.variable(ctx, ring, trunc, z_name)
    z_power = TruncatedSeries.one(ctx, ring, trunc)
    for i, fi in enumerate(expand_F_in_S(c)):
        if i >= trunc:
            break
        pieces = pieces + fi.truncate(min(trunc, fi.truncation)).with_context(ctx) * z_power
        z_power = z_power * z
    result = pieces
    for tin, w in inputs:
        geom_terms = {}
        ti, wi = ctx.index(tin), ctx.index(w)
        k = 0
        while 2 * k < trunc:
            mon = [0] * len(ctx)
            mon[ti] = k
            mon[wi] = k
            geom_terms[tuple(mon)] = ring.one()
            k += 1
        result = result * TruncatedSeries(ctx, ring, trunc, geom_terms)
    return result
