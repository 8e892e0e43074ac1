"""
Command line entry point.

    coverembed split   [--config PATH]
    coverembed embed   [--config PATH] [--map E|F]
    coverembed verify  [--config PATH] [--seed U64] [--samples N] [--out PATH]
    coverembed export  [--config PATH] [--map E|F] [--format csv|obj] [--window REAL] [--out PATH]

Without ``--config`` the bundled default is used: the identity metric on the
2-torus with the Clifford oracle.

Config files are strict JSON.  Metric and oracle expressions use a small
language: numbers, ``pi``, variables ``x1 .. xn``, ``+ - * / ^`` (all
left-associative; unary minus binds tighter than ``^``), and the functions
``sin cos exp log sqrt pow(a, b)``.  Example::

    {"n": 2,
     "metric": {"family": "conformal", "f": "0.3*sin(2*pi*x1)"},
     "oracle": "warped"}
"""
from __future__ import annotations

import argparse
import sys

from .config import config_hash, effective, load_config, parse_config
from .errors import CoverEmbedError
from .export import mesh_obj, samples_csv
from .pipeline import build_field, build_pipeline, run_suite, with_overrides
from .metric_field import split_metric
from .sampling import Sampler

DEFAULT_CONFIG = {"n": 2, "metric": "identity", "oracle": "clifford", "group": "torus-2"}


def _parser():
    ap = argparse.ArgumentParser(
        prog="coverembed",
        description=__doc__.split("\n\n", 1)[0].strip(),
        epilog=__doc__.split("\n\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="JSON run config (default: identity metric, n=2)")
        p.add_argument("--seed", type=int, metavar="U64", help="override verify.seed")
        p.add_argument("--samples", type=int, metavar="N", help="override the sample count")
        p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
        return p

    common(sub.add_parser("split", help="print the split constant c and the margin"))
    p = common(sub.add_parser("embed", help="build E or F and summarize it"))
    p.add_argument("--map", choices=["E", "F"], default="E")
    p = common(sub.add_parser("verify", help="run the full check suite and write the report"))
    p.add_argument("--timing", action="store_true", help="include wall times (report no longer reproducible)")
    p = common(sub.add_parser("export", help="write CSV samples or an OBJ mesh"))
    p.add_argument("--map", choices=["E", "F"], default="E")
    p.add_argument("--format", choices=["csv", "obj"], default="csv")
    p.add_argument("--window", type=float, metavar="REAL", help="override export.window")
    return ap


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_split(cfg, args):
    split = split_metric(build_field(cfg), cfg.split.fraction, cfg.split.resolution)
    _emit(
        f"c = {split.c!r}\n"
        f"margin = {split.margin!r}\n"
        f"min_eigenvalue = {split.min_eigenvalue!r}\n"
        f"grid = {split.resolution}^{cfg.n}\n",
        args.out,
    )
    return 0


def _cmd_embed(cfg, args):
    p = build_pipeline(cfg)
    m = p.map(args.map)
    bound = "unbounded" if m.radius is None else repr(m.radius)
    _emit(
        f"map = {m.tag}\n"
        f"n = {p.n}\n"
        f"oracle = {p.oracle.name}\n"
        f"N = {p.oracle.N}\n"
        f"D = {m.D}\n"
        f"c = {p.split.c!r}\n"
        f"R_Phi = {p.oracle.radius!r}\n"
        f"oracle_residual = {p.oracle.residual!r}\n"
        f"bound = {bound}\n",
        args.out,
    )
    return 0


def _cmd_verify(cfg, args):
    report = run_suite(build_pipeline(cfg))
    _emit(report.to_json(include_timing=args.timing), args.out)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    print(f"{'all checks passed' if report.passed else 'SOME CHECKS FAILED'}", file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_export(cfg, args):
    p = build_pipeline(cfg)
    m = p.map(args.map)
    ex = cfg.export
    window = ex.window if args.window is None else args.window
    if args.format == "csv":
        count = ex.samples if args.samples is None else args.samples
        text = samples_csv(m, Sampler(cfg.verify.seed, -window, window, count))
    else:
        text = mesh_obj(m, window, ex.resolution, ex.coords, config_hash(cfg))
    _emit(text, args.out)
    return 0


COMMANDS = {"split": _cmd_split, "embed": _cmd_embed, "verify": _cmd_verify, "export": _cmd_export}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else parse_config(DEFAULT_CONFIG)
        samples = args.samples if args.command == "verify" else None
        cfg = with_overrides(cfg, args.seed, samples)
        return COMMANDS[args.command](cfg, args)
    except (CoverEmbedError, OSError) as exc:
        print(f"coverembed {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
