"""
Command-line interface: ``qes2 {classify,c0,range,solve,verify,plot}``.

Exit codes: 0 success (or all checks pass), 1 usage or I/O error,
2 inadmissible parameters or out-of-domain input, 3 verification failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from .admissibility import admissible_c_range, classify, compute_c0
from .errors import InadmissibleError, QESError
from .geometry import build_solution
from .profile import ModelParams, make_profile
from .verification import (
    DEFAULT_GRID,
    DOCUMENT_GRID,
    solution_document,
    solution_from_document,
    tolerance_factor,
    verify_solution,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INADMISSIBLE = 2
EXIT_VERIFY_FAILED = 3

DEFAULT_SAMPLES = 801


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _finite(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return val


def _positive_int(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return val


def _x_range(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"range must be lo:hi, got {text!r}")
    lo, hi = (_finite(p) for p in parts)
    return lo, hi


def dumps(obj):
    """Deterministic JSON: sorted keys, two-space indent, trailing newline.

    Floats use the shortest repr that round-trips exactly.
    """
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _add_params(p, with_b=False):
    p.add_argument("--m", type=_finite, required=True, help="quasi-Einstein exponent (nonzero)")
    p.add_argument("--lambda", dest="lam", type=_finite, required=True, help="cosmological constant")
    p.add_argument("--c", type=_finite, required=True, help="even-part coefficient")
    if with_b:
        p.add_argument("--b", type=_finite, default=0.0, help="odd-part coefficient (default 0)")


# -- subcommands -----------------------------------------------------------

def cmd_classify(args):
    if args.m == 0:
        print("error: MZero: m must be nonzero", file=sys.stderr)
        return EXIT_USAGE
    verdict = classify(args.m, args.lam, args.c, args.b)
    if args.json:
        sys.stdout.write(dumps(verdict.to_dict()))
    elif verdict.admissible:
        print(f"admissible; c_range={verdict.c_range}")
    else:
        print(f"not admissible: {verdict.reason.value}; c_range={verdict.c_range}")
    return EXIT_OK if verdict.admissible else EXIT_INADMISSIBLE


def cmd_c0(args):
    if not args.m > 0:
        print(f"error: c0 is defined for m > 0 only, got m = {args.m}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    r = compute_c0(args.m)
    print(f"x0={r.x0:.12f} xmin={r.xmin:.12f} c0={r.c0:.12f}")
    return EXIT_OK


def cmd_range(args):
    if args.m == 0:
        print("error: MZero: m must be nonzero", file=sys.stderr)
        return EXIT_USAGE
    rng = admissible_c_range(args.m, args.lam)
    if args.json:
        sys.stdout.write(dumps(rng.to_dict()))
    else:
        print(f"c_range={rng}")
    return EXIT_OK


def cmd_solve(args):
    if args.m == 0:
        print("error: MZero: m must be nonzero", file=sys.stderr)
        return EXIT_USAGE
    try:
        sol = build_solution(args.m, args.lam, args.c)
    except InadmissibleError as exc:
        sys.stdout.write(dumps(exc.verdict.to_dict()))
        return EXIT_INADMISSIBLE
    except QESError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    text = dumps(solution_document(sol, grid=args.grid))
    try:
        _write_text(args.out, text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    r = sol.roots
    print(f"wrote {args.out}: x1={float(r.x1)!r} x2={float(r.x2)!r} period={float(sol.period)!r}")
    return EXIT_OK


def cmd_verify(args):
    try:
        factor = tolerance_factor()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.document is not None:
        if any(v is not None for v in (args.m, args.lam, args.c)):
            print("error: give either a document or --m/--lambda/--c, not both", file=sys.stderr)
            return EXIT_USAGE
        try:
            with open(args.document, encoding="utf-8") as fh:
                doc = json.load(fh)
            sol = solution_from_document(doc)
        except (OSError, ValueError) as exc:
            print(f"error: cannot use {args.document}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        if any(v is None for v in (args.m, args.lam, args.c)):
            print("error: need a document path or all of --m, --lambda, --c", file=sys.stderr)
            return EXIT_USAGE
        if args.m == 0:
            print("error: MZero: m must be nonzero", file=sys.stderr)
            return EXIT_USAGE
        try:
            sol = build_solution(args.m, args.lam, args.c)
        except InadmissibleError as exc:
            sys.stdout.write(dumps(exc.verdict.to_dict()))
            return EXIT_INADMISSIBLE
        except QESError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INADMISSIBLE
    try:
        report = verify_solution(sol, grid=args.grid, factor=factor)
    except QESError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    text = dumps(report.to_dict())
    if args.report:
        try:
            _write_text(args.report, text)
        except OSError as exc:
            print(f"error: cannot write {args.report}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    for name, chk in sorted(report.checks.items()):
        status = "PASS" if chk.passed else "FAIL"
        print(f"{status} {name}: {chk.max_abs_residual:.3e} (tol {chk.tolerance:.1e})")
    return EXIT_OK if report.all_passed else EXIT_VERIFY_FAILED


def plot_samples(profile, lo, hi, samples):
    """Sample B on ``samples`` evenly spaced nodes of [lo, hi] (ends included).

    Nodes are formed as (lo (n-1-k) + hi k) / (n-1) so that symmetric ranges
    produce exactly symmetric abscissae.
    """
    k = np.arange(samples, dtype=float)
    n1 = samples - 1
    xs = (lo * (n1 - k) + hi * k) / n1
    with np.errstate(all="ignore"):
        B = np.asarray(profile.value(xs), dtype=float)
    return xs, B


def csv_text(xs, B):
    lines = ["x,B"]
    lines += [f"{x:.17g},{b:.17g}" for x, b in zip(xs, B)]
    return "\n".join(lines) + "\n"


def svg_text(xs, B, title, width=640, height=480, margin=50):
    """A minimal SVG 1.1 line plot with axes, drawn from the given samples."""
    finite = np.isfinite(B)
    ys = B[finite] if finite.any() else np.array([0.0])
    ylo, yhi = float(min(ys.min(), 0.0)), float(max(ys.max(), 0.0))
    if yhi == ylo:
        yhi = ylo + 1.0
    xlo, xhi = float(xs[0]), float(xs[-1])
    pw, ph = width - 2 * margin, height - 2 * margin

    def px(x):
        return margin + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return margin + (yhi - y) / (yhi - ylo) * ph

    segments, current = [], []
    for x, y, ok in zip(xs, B, finite):
        if ok:
            current.append(f"{px(x):.3f},{py(y):.3f}")
        elif current:
            segments.append(current)
            current = []
    if current:
        segments.append(current)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="{margin / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    if xlo <= 0.0 <= xhi:
        out.append(f'<line x1="{px(0.0):.3f}" y1="{margin}" x2="{px(0.0):.3f}" y2="{margin + ph}" '
                   'stroke="gray" stroke-width="1"/>')
    out.append(f'<line x1="{margin}" y1="{py(0.0):.3f}" x2="{margin + pw}" y2="{py(0.0):.3f}" '
               'stroke="gray" stroke-width="1"/>')
    out.append(f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" '
               'stroke="black" stroke-width="1"/>')
    for label, x, y, anchor in (
        (f"{xlo:g}", margin, margin + ph + 20, "start"),
        (f"{xhi:g}", margin + pw, margin + ph + 20, "end"),
        (f"{yhi:.4g}", margin - 6, margin + 5, "end"),
        (f"{ylo:.4g}", margin - 6, margin + ph, "end"),
        ("x", margin + pw / 2, height - 10, "middle"),
    ):
        out.append(f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="{anchor}" '
                   f'font-family="sans-serif" font-size="12">{label}</text>')
    for seg in segments:
        out.append(f'<polyline fill="none" stroke="blue" stroke-width="1.5" points="{" ".join(seg)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args):
    lo, hi = args.range
    if not lo < hi:
        print(f"error: empty or inverted range {lo}:{hi}", file=sys.stderr)
        return EXIT_USAGE
    if args.samples < 2:
        print("error: --samples must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    if args.m == 0:
        print("error: MZero: m must be nonzero", file=sys.stderr)
        return EXIT_USAGE
    try:
        profile = make_profile(ModelParams(m=args.m, lam=args.lam, c=args.c, b=args.b))
    except QESError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    xs, B = plot_samples(profile, lo, hi, args.samples)
    title = f"B(x) for m={args.m:g}, c={args.c:g}, lambda={args.lam:g}"
    if args.b:
        title += f", b={args.b:g}"
    try:
        if args.csv:
            _write_text(args.csv, csv_text(xs, B))
        if args.svg:
            _write_text(args.svg, svg_text(xs, B, title))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.csv and not args.svg:
        sys.stdout.write(csv_text(xs, B))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="qes2", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="decide admissibility of (m, lambda, c, b)")
    _add_params(p, with_b=True)
    p.add_argument("--json", action="store_true", help="print the verdict as JSON")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("c0", help="threshold constant c0(m) for m > 0")
    p.add_argument("--m", type=_finite, required=True)
    p.set_defaults(func=cmd_c0)

    p = sub.add_parser("range", help="admissible interval of c for (m, lambda)")
    p.add_argument("--m", type=_finite, required=True)
    p.add_argument("--lambda", dest="lam", type=_finite, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_range)

    p = sub.add_parser("solve", help="build a sphere solution and write it as JSON")
    _add_params(p)
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--grid", type=int, default=DOCUMENT_GRID,
                   help=f"Chebyshev grid size stored in the document (default {DOCUMENT_GRID}, 0 = none)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run all residual checks on a solution")
    p.add_argument("document", nargs="?", help="solution JSON written by 'solve'")
    p.add_argument("--m", type=_finite)
    p.add_argument("--lambda", dest="lam", type=_finite)
    p.add_argument("--c", type=_finite)
    p.add_argument("--grid", type=_positive_int, default=DEFAULT_GRID)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="sample B(x) to CSV and/or SVG")
    _add_params(p, with_b=True)
    p.add_argument("--range", type=_x_range, default=(-4.0, 4.0), help="lo:hi (default -4:4)")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                   help=f"number of samples (default {DEFAULT_SAMPLES})")
    p.add_argument("--svg", help="SVG output path")
    p.add_argument("--csv", help="CSV output path")
    p.set_defaults(func=cmd_plot)
    return parser


def _join_range(argv):
    # "--range -4:4" would otherwise be read as an option named "-4:4"
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--range":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--range={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_range(argv))
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "grid", None) is not None and args.grid < 0:
        print("error: --grid must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
