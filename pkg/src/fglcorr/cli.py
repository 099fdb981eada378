"""Command-line surface for the engine.

Subcommands: law, nseries, multisum, decompose, correction, verify,
qprod, subdivide.  Exit status 0 on success, 1 when a mathematical
verdict fails (an identity does not hold), 2 on usage or IO errors.
All JSON output is sorted and indented, so identical invocations
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .correction import (
    CorrectionSeries,
    DivisorPresentation,
    compute_correction,
    verify_correction,
)
from .divisor import ConeComplexModel, barycentric_subdivide, j_decompose
from .errors import EngineError, SchemaError
from .fgl import construct_law, multi_sum, n_series, parse_law_selector
from .gw import associativity_check, corrected_product, load_datum
from .series import VariableContext


def _dump_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _law_from_kind_flags(args):
    return construct_law(
        args.kind, args.bound, p=args.p, n=args.n,
        num_generators=args.generators,
    )


def _default_bound(args) -> int:
    if getattr(args, "bound", None):
        return args.bound
    return max(args.trunc - 1, 2)


def _int_list(text: str, flag: str):
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise SchemaError(f"bad {flag} list {text!r}") from exc


# ---------------- subcommand handlers ----------------


def cmd_law(args) -> int:
    law = _law_from_kind_flags(args)
    if args.format == "json":
        _dump_json(law.to_json())
        return 0
    ring_doc = json.dumps(law.ring.to_json(), sort_keys=True)
    print(f"{law.name}, ring {ring_doc}, bound {law.degree_bound}")
    for i, j, coeff in law.coefficient_table():
        print(f"a[{i},{j}] = {coeff}")
    return 0


def cmd_nseries(args) -> int:
    law = parse_law_selector(args.law, _default_bound(args))
    series = n_series(law, args.multiple, args.var, args.trunc)
    if args.format == "json":
        _dump_json(series.to_json())
    else:
        print(series.render())
    return 0


def _multisum_from_args(args):
    variables = [v.strip() for v in args.vars.split(",") if v.strip()]
    multiplicities = _int_list(args.multiplicities, "--multiplicities")
    if len(variables) != len(multiplicities):
        raise SchemaError("one multiplicity per variable required")
    law = parse_law_selector(args.law, _default_bound(args))
    ctx = VariableContext(tuple(variables))
    return multi_sum(law, variables, multiplicities, args.trunc, ctx)


def cmd_multisum(args) -> int:
    series = _multisum_from_args(args)
    if args.format == "json":
        _dump_json(series.to_json())
    else:
        print(series.render())
    return 0


def cmd_decompose(args) -> int:
    decomposition = j_decompose(_multisum_from_args(args))
    if args.format == "json":
        _dump_json(decomposition.to_json())
    else:
        doc = decomposition.to_json()
        for key in sorted(doc["components"]):
            series = decomposition.component(tuple(int(c) for c in key))
            print(f"J={key}: {series.render()}")
    return 0


def cmd_correction(args) -> int:
    law = parse_law_selector(args.law, _default_bound(args))
    pres = DivisorPresentation(
        law, args.N, args.trunc, decorated=args.decorated,
        negation=args.negation.replace("-", "_"),
    )
    corr = compute_correction(pres)
    if args.format == "json":
        _dump_json(corr.to_json())
        return 0
    print(f"f = {corr.f.render()}")
    for j, stage in enumerate(corr.per_stage):
        print(f"f_{j} = {stage.render()}")
    if corr.witness.is_empty():
        print("witness: empty")
    else:
        for j, g in corr.witness.entries:
            print(f"g_{j} = {g.render()}")
    return 0


def cmd_verify(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    corr = CorrectionSeries.from_json(doc)
    verdict = verify_correction(corr)
    if verdict.ok:
        print("identity verified: residual is zero")
        return 0
    names = corr.presentation.context.names
    mon = verdict.offending_monomial
    pretty = "*".join(
        f"{n}^{e}" if e > 1 else n for n, e in zip(names, mon) if e
    ) or "1"
    print(f"identity FAILS at monomial {pretty}")
    return 1


def _parse_vector(datum, text: str):
    if text in datum.basis:
        return datum.basis_vector(datum.basis.index(text))
    entries = [x.strip() for x in text.split(",")]
    if len(entries) != len(datum.basis):
        raise SchemaError(
            f"vector {text!r} has {len(entries)} entries, expected "
            f"{len(datum.basis)}"
        )
    return tuple(datum.ring.parse(x) for x in entries)


def cmd_qprod(args) -> int:
    with open(args.datum, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    datum = load_datum(doc)
    bound = args.bound if args.bound else max(args.truncation - 1, 2)
    law = parse_law_selector(args.law, bound)
    negation = args.negation.replace("-", "_")
    if args.check_assoc:
        report = associativity_check(
            datum, law, args.cutoff, args.truncation, negation
        )
        if args.format == "json":
            _dump_json(report.to_json(datum.ring))
        else:
            print(report.render(datum.ring))
        return 0 if report.associative else 1
    if args.a is None or args.b is None:
        raise SchemaError("qprod needs --a and --b (or --check-assoc)")
    a = _parse_vector(datum, args.a)
    b = _parse_vector(datum, args.b)
    series = corrected_product(
        datum, law, a, b, args.cutoff, args.truncation, negation
    )
    if args.format == "json":
        _dump_json(series.to_json())
    else:
        print(series.render())
    return 0


def cmd_subdivide(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "faces" not in doc:
        raise SchemaError('subdivide input must be {"faces": [[...], ...]}')
    complex_ = ConeComplexModel.from_maximal_faces(doc["faces"])
    for _ in range(args.times):
        complex_ = barycentric_subdivide(complex_)
    _dump_json(complex_.to_json())
    return 0


# ---------------- parser ----------------


def _add_format(p):
    p.add_argument("--format", choices=("text", "json"), default="text")


def _add_law_selector(p):
    p.add_argument("--law", required=True,
                   help="additive | multiplicative | honda:p,n | generic_log[:k]")
    p.add_argument("--bound", type=int, default=None,
                   help="law degree bound (default: trunc - 1)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fglcorr",
        description="Formal group laws, divisor strata and corrected "
                    "quantum products, in exact arithmetic.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("law", help="print a law's coefficient table")
    p.add_argument("--kind", required=True,
                   choices=("additive", "multiplicative", "honda",
                            "generic-log", "generic_log"))
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--generators", type=int, default=None)
    p.add_argument("--bound", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("nseries", help="the n-fold formal sum [n]x")
    _add_law_selector(p)
    p.add_argument("--multiple", type=int, required=True)
    p.add_argument("--var", default="x")
    p.add_argument("--trunc", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_nseries)

    p = sub.add_parser("multisum", help="the multi-sum of several variables")
    _add_law_selector(p)
    p.add_argument("--vars", required=True, help="comma-separated names")
    p.add_argument("--multiplicities", required=True,
                   help="comma-separated integers")
    p.add_argument("--trunc", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_multisum)

    p = sub.add_parser("decompose",
                       help="J-decomposition of a multi-sum, keyed by bitstrings")
    _add_law_selector(p)
    p.add_argument("--vars", required=True)
    p.add_argument("--multiplicities", required=True)
    p.add_argument("--trunc", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("correction",
                       help="correction series f (or F) with rewrite witness")
    _add_law_selector(p)
    p.add_argument("--N", type=int, required=True,
                   help="divisor variables D_0 .. D_N")
    p.add_argument("--trunc", type=int, required=True)
    p.add_argument("--negation", choices=("literal", "formal-inverse"),
                   default="literal")
    p.add_argument("--decorated", action="store_true",
                   help="add the cotangent variables S, T")
    _add_format(p)
    p.set_defaults(func=cmd_correction)

    p = sub.add_parser("verify", help="replay a dumped correction's witness")
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("qprod", help="corrected quantum product")
    p.add_argument("--datum", required=True, help="datum JSON file")
    p.add_argument("--law", required=True)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--cutoff", required=True, help="area cutoff, e.g. 5 or 7/2")
    p.add_argument("--truncation", type=int, required=True)
    p.add_argument("--a", default=None, help="basis name or comma-separated vector")
    p.add_argument("--b", default=None)
    p.add_argument("--negation", choices=("literal", "formal-inverse"),
                   default="literal")
    p.add_argument("--check-assoc", action="store_true")
    _add_format(p)
    p.set_defaults(func=cmd_qprod)

    p = sub.add_parser("subdivide", help="barycentric subdivision of a complex")
    p.add_argument("--file", required=True,
                   help='JSON file {"faces": [["a","b"], ...]}')
    p.add_argument("--times", type=int, default=1)
    p.set_defaults(func=cmd_subdivide)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
