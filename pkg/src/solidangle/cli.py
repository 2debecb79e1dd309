"""Command-line entry point: ``solidangle <subcommand> ...``.

Exit status is 2 for unreadable or invalid input, 1 when a verification
report has violations, 0 otherwise.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

from .bounds import bound_reduced, classify_and_bound
from .errors import SolidAngleError
from .harness import (
    LatticeModel,
    ModelKind,
    ScanDomain,
    ScanId,
    gen_lattice,
    scan_monotonicity,
    verify_sp_area,
    verify_theorem_main3,
)
from .lattice import BasisMatrix, GramMatrix, gram_from_basis
from .reduction import (
    MinimaRatios,
    ReducedBasis,
    VertexAngles,
    normalize_minimal_basis,
    vertex_angles,
)
from .solid import lhuilier_solid_angle, monte_carlo_solid_angle, oosterom_solid_angle


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("SOLIDANGLE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"SOLIDANGLE_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


def _load_gram(args) -> GramMatrix:
    if (args.input is None) == (args.gram is None):
        raise UsageError("give exactly one of an input file or --gram")
    if args.gram is not None:
        return GramMatrix.from_inline(args.gram)
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}")
    if text.lstrip().startswith("{"):
        return GramMatrix.from_json(text)
    return gram_from_basis(BasisMatrix.from_text(text))


def _floats(raw: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(t) for t in raw.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be {n} comma-separated numbers")
    if len(vals) != n:
        raise UsageError(f"{what} must be {n} comma-separated numbers")
    return vals


def _synthetic_reduced(args) -> ReducedBasis:
    """Unit-vector Gram with the given angles, carrying the given ratios."""
    t12, t13, t23 = _floats(args.angles, 3, "--angles")
    k12, k23 = _floats(args.ratios, 2, "--ratios")
    angles = VertexAngles(t12, t13, t23)
    c12, c13, c23 = math.cos(t12), math.cos(t13), math.cos(t23)
    gram = GramMatrix.from_rows([[1.0, c12, c13], [c12, 1.0, c23], [c13, c23, 1.0]], exact=False)
    identity = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    return ReducedBasis(gram, angles, MinimaRatios(k12, k12 * k23, k23), (1, 1), identity)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def dumps(obj) -> str:
    # json writes floats with repr: shortest round-trip form, at most 17 digits
    return json.dumps(obj, separators=(",", ":"), allow_nan=True)


def _flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return rows
    if isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        rows = []
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}[{i}]")
        return rows
    return [(prefix, dumps(obj))]


def table(obj) -> str:
    rows = _flatten(obj)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def _emit(obj, fmt: str, report=None) -> None:
    if fmt == "table":
        sys.stdout.write(report.to_table() if report is not None else table(obj))
    else:
        sys.stdout.write(dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_reduce(args) -> int:
    _emit(normalize_minimal_basis(_load_gram(args)).to_json_obj(), args.format)
    return 0


def _target_gram(args) -> GramMatrix:
    gram = _load_gram(args)
    return normalize_minimal_basis(gram).gram if args.reduce else gram


def _cmd_angles(args) -> int:
    _emit(vertex_angles(_target_gram(args)).to_json_obj(), args.format)
    return 0


def _cmd_omega(args) -> int:
    gram = _target_gram(args)
    if args.method == "lhuilier":
        omega = lhuilier_solid_angle(vertex_angles(gram))
        extra = {}
    elif args.method == "oosterom":
        omega = oosterom_solid_angle(gram)
        extra = {}
    else:
        omega, stderr = monte_carlo_solid_angle(gram, args.samples, args.seed, workers=_threads())
        extra = {"stderr": stderr if args.units == "normalized" else stderr * 4 * math.pi}
    out = omega.to_json_obj()
    if args.units == "steradians":
        out = {"steradians": omega.steradians, "normalized": omega.normalized}
    out.update(extra)
    _emit(out, args.format)
    return 0


def _cmd_classify(args) -> int:
    if args.angles is not None or args.ratios is not None:
        if args.angles is None or args.ratios is None or args.input is not None or args.gram is not None:
            raise UsageError("--angles and --ratios go together and replace the lattice input")
        report = bound_reduced(_synthetic_reduced(args), cross_check=False)
    else:
        report = classify_and_bound(_load_gram(args))
    _emit(report.to_json_obj(), args.format)
    return 0


def _model(args) -> LatticeModel:
    kw = {"dim": args.dim, "perturbation": args.perturbation}
    if args.range is not None:
        kw["entry_range"] = args.range
    elif args.model == ModelKind.INTEGER_SMALL.value:
        kw["entry_range"] = 4
    return LatticeModel(ModelKind(args.model), **kw)


def _cmd_verify(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.check == "main3":
        report = verify_theorem_main3(
            _model(args), args.n, args.seed, workers=_threads(), mc_fraction=args.mc_fraction
        )
    else:
        report = verify_sp_area(args.n, args.seed, workers=_threads())
    _emit(report.to_json_obj(), args.format, report)
    return 0 if report.ok else 1


def _cmd_scan(args) -> int:
    report = scan_monotonicity(ScanDomain(ScanId(args.domain), args.grid))
    _emit(report.to_json_obj(), args.format, report)
    return 0 if report.ok else 1


def _cmd_gen(args) -> int:
    sys.stdout.write(gen_lattice(_model(args), args.seed, args.index).to_text())
    return 0


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="basis text file ('N 3' header) or Gram JSON file")
    p.add_argument("--gram", help='inline Gram "g11,g12,g13;g21,g22,g23;g31,g32,g33"')


def _add_model(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--model", default=default, choices=[k.value for k in ModelKind])
    p.add_argument("--dim", type=int, default=3, help="ambient dimension N")
    p.add_argument("--range", type=float, default=None, help="entry range for UNIFORM_BASIS / INTEGER_SMALL")
    p.add_argument("--perturbation", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solidangle", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "table"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)
    # --format is accepted before or after the subcommand
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS)

    p = sub.add_parser("reduce", parents=[fmt], help="normalized minimal basis")
    _add_input(p)
    p.set_defaults(func=_cmd_reduce)

    for name, func, helptext in (
        ("angles", _cmd_angles, "vertex angles of the basis"),
        ("omega", _cmd_omega, "solid angle of the cone over the basis"),
    ):
        p = sub.add_parser(name, parents=[fmt], help=helptext)
        _add_input(p)
        p.add_argument("--reduce", action="store_true", help="use the normalized minimal basis instead")
        if name == "omega":
            p.add_argument("--method", choices=("lhuilier", "oosterom", "mc"), default="lhuilier")
            p.add_argument("--units", choices=("normalized", "steradians"), default="normalized")
            p.add_argument("--samples", type=int, default=10**6)
            p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)

    p = sub.add_parser("classify", parents=[fmt], help="branch and bounds of the normalized minimal basis")
    _add_input(p)
    p.add_argument("--angles", help="t12,t13,t23 in radians (synthetic input, no lattice)")
    p.add_argument("--ratios", help="k12,k23 (synthetic input, no lattice)")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("verify", parents=[fmt], help="population check")
    p.add_argument("check", choices=("main3", "sparea"))
    _add_model(p, ModelKind.WR_REJECTION.value)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc-fraction", type=float, default=0.01)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("scan", parents=[fmt], help="monotonicity scan")
    p.add_argument("domain", choices=[s.value for s in ScanId])
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("gen", parents=[fmt], help="write one generated basis")
    _add_model(p, ModelKind.WR_REJECTION.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", type=int, default=0)
    p.set_defaults(func=_cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SolidAngleError, ValueError) as exc:
        print(f"solidangle {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
