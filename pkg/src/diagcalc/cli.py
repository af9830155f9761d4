"""
Command-line front end.

Subcommands: ``integrate`` (formal Gaussian integral of a series file
against a covariance file), ``check`` (seeded property suites), ``bch``
(the BCH tree series) and ``reduce`` (normal form of an expression).
Exit status: 0 when everything passes, 1 on a check failure, 2 on bad input.
"""
from __future__ import annotations

import argparse
import sys

from .basis import build_basis, reduce
from .bch import MAX_BCH_DEGREE, bch_trees
from .checks import SUITES, run_suite
from .diagram import DiagramError, leg_labels, nverts
from .gaussian import DegenerateCovarianceError, Gaussian, NotGaussianError, integrate
from .grammar import (ParseError, format_diagram, format_label, format_rational,
                      format_series, format_sum, parse_covariance, parse_series,
                      parse_sum)
from .series import Caps

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def coords_text(s) -> str:
    """Coordinates of a reduced sum against the quotient basis of each grade."""
    grades = {}
    for d, c in s.items():
        grades.setdefault((nverts(d), leg_labels(d)), {})[d] = c
    lines = []
    for (v, legs) in sorted(grades):
        gb = build_basis(v, legs)
        red = gb.coords(grades[(v, legs)])
        vec = [format_rational(red.get(b, 0)) for b in gb.basis]
        lines.append("grade %d [%s]: (%s)" % (v, ",".join(map(format_label, legs)), ", ".join(vec)))
        for k, b in enumerate(gb.basis):
            lines.append("  b%d = %s" % (k, format_diagram(b)))
    return "\n".join(lines) + "\n" if lines else "0\n"


def render(s, fmt) -> str:
    if fmt == "coords":
        return coords_text(s)
    return format_sum(s) + "\n"


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise InputError("%s: %s" % (path, e.strerror)) from None


def _caps(args) -> Caps:
    return Caps(2 * args.max_degree, args.max_legs)


def cmd_integrate(args) -> int:
    try:
        labels, cov = parse_covariance(_read(args.covariance))
    except ParseError as e:
        raise InputError("%s: %s" % (args.covariance, e)) from None
    try:
        P = parse_series(_read(args.series), caps=_caps(args))
    except ParseError as e:
        raise InputError("%s: %s" % (args.series, e)) from None
    F = [v.strip() for v in args.vars.split(",") if v.strip()] if args.vars else list(labels)
    unknown = [v for v in F if v not in labels]
    if unknown:
        raise InputError("--vars: unknown variable(s) %s" % ",".join(unknown))
    try:
        g = Gaussian(tuple(labels), cov, P)
        res = integrate(g, F)
    except (DegenerateCovarianceError, NotGaussianError, DiagramError) as e:
        raise InputError(str(e)) from None
    if isinstance(res, Gaussian):
        out = ["# covariance", ",".join(res.labels)]
        out += [" ".join(format_rational(c) for c in row) for row in res.cov]
        sys.stdout.write("\n".join(out) + "\n# series\n")
        P = reduce(res.P)
        sys.stdout.write(coords_text(P) if args.format == "coords" else format_series(P))
    else:
        sys.stdout.write(render(reduce(res), args.format))
    return EXIT_OK


def cmd_check(args) -> int:
    names = SUITES if args.name == "all" else (args.name,)
    ok = True
    for name in names:
        rep = run_suite(name, seed=args.seed, max_degree=args.max_degree, cases=args.cases)
        sys.stdout.write(rep.text())
        ok = ok and rep.ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bch(args) -> int:
    if not 1 <= args.degree <= MAX_BCH_DEGREE:
        raise InputError("--degree must be between 1 and %d" % MAX_BCH_DEGREE)
    sys.stdout.write(render(bch_trees(args.degree), args.format))
    return EXIT_OK


def cmd_reduce(args) -> int:
    text = _read(args.file) if args.file else args.expression
    if text is None:
        raise InputError("give an expression or --file")
    try:
        s = parse_sum(text.strip(), caps=_caps(args))
    except ParseError as e:
        raise InputError(str(e)) from None
    sys.stdout.write(render(reduce(s), args.format))
    return EXIT_OK


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer, got %r" % text) from None
    if v < 0:
        raise argparse.ArgumentTypeError("expected a non-negative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diagcalc", description=__doc__.strip().splitlines()[0])
    p.add_argument("--format", choices=("grammar", "coords"), default="grammar",
                   help="print expressions or reduced coordinates")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, degree=2):
        sp.add_argument("--max-degree", type=_positive, default=degree,
                        help="internal degree cap (half the vertex count)")
        sp.add_argument("--max-legs", type=_positive, default=16)
        sp.add_argument("--format", choices=("grammar", "coords"),
                        default=argparse.SUPPRESS)

    sp = sub.add_parser("integrate", help="formal Gaussian integral of a series")
    sp.add_argument("--covariance", required=True, help="covariance matrix file")
    sp.add_argument("--series", required=True, help="series file for P")
    sp.add_argument("--vars", help="comma-separated variables to integrate (default all)")
    common(sp, degree=3)
    sp.set_defaults(run=cmd_integrate)

    sp = sub.add_parser("check", help="run a seeded property suite")
    sp.add_argument("name", choices=SUITES + ("all",))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=_positive, default=20)
    common(sp)
    sp.set_defaults(run=cmd_check)

    sp = sub.add_parser("bch", help="print the BCH tree series")
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--format", choices=("grammar", "coords"), default=argparse.SUPPRESS)
    sp.set_defaults(run=cmd_bch)

    sp = sub.add_parser("reduce", help="normal form of a diagram expression")
    sp.add_argument("expression", nargs="?")
    sp.add_argument("--file")
    common(sp, degree=3)
    sp.set_defaults(run=cmd_reduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.run(args)
    except InputError as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
