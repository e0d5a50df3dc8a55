"""``fockcheck`` command line: verify, sweep, converge."""
from __future__ import annotations

import argparse
import sys

from .fock import CutoffSpec
from .harness import (
    CONVERGENCE_CHECKS,
    EXIT_USAGE,
    ConfigError,
    RunConfig,
    convergence_study,
    exit_code,
    load_config,
    make_manifest,
    parse_complex,
    resolve_output_dir,
    run_suite,
    suite_names,
    write_outputs,
)
from .reports import emit_report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tolerance_pair(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected CHECK=VALUE, got {text!r}")
    return key, float(val)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--n", type=int, nargs="+", help="excitation numbers")
    p.add_argument("--r", type=float, nargs="+", help="mixing magnitudes r")
    p.add_argument("--theta", type=float, nargs="+", help="mixing phases theta")
    p.add_argument("--tau", type=parse_complex, nargs="+",
                   help="mixing ratios tau (e.g. 1, 0.5+0.2j); replaces the r x theta grid")
    p.add_argument("--alpha", type=parse_complex, nargs="+", help="displacement amplitudes")
    p.add_argument("--m-block", type=int, nargs="+", help="parity block sizes M")
    p.add_argument("--cutoff-b", type=int, help="b-mode cutoff; the c mode defaults to the same value")
    p.add_argument("--cutoff-c", type=int, help="c-mode cutoff")
    p.add_argument("--margin", type=int, help="interior margin")
    p.add_argument("--tol", type=float, help="tolerance applied to every check")
    p.add_argument("--tolerance", type=_tolerance_pair, action="append", default=[],
                   metavar="CHECK=VALUE", help="per-check tolerance; CHECK may be a glob")
    p.add_argument("--seed", type=int, help="seed for random probe states")
    p.add_argument("--workers", type=int, help="threads for grid evaluation")
    p.add_argument("--out", help="output directory for reports.json, reports.csv, manifest.json")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table",
                   help="what to print on stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fockcheck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run one named suite over a grid")
    v.add_argument("suite", choices=suite_names())
    _add_common(v)
    s = sub.add_parser("sweep", help="run the suite named in a config file")
    _add_common(s)
    c = sub.add_parser("converge", help="cutoff-doubling study of one check")
    c.add_argument("check_id", choices=sorted(CONVERGENCE_CHECKS))
    c.add_argument("--start", type=int, help="first cutoff")
    c.add_argument("--cap", type=int, help="largest cutoff tried")
    _add_common(c)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "suite", None):
        cfg.suite = args.suite
    g = cfg.grid
    for flag, axis in (("n", "n"), ("r", "r"), ("theta", "theta"), ("alpha", "alpha"),
                       ("tau", "tau"), ("m_block", "M")):
        val = getattr(args, flag)
        if val is not None:
            setattr(g, axis, list(val))
    if args.r is not None or args.theta is not None:
        if args.tau is None:
            g.tau = None
    if args.cutoff_b is not None or args.cutoff_c is not None:
        base = cfg.cutoff
        nb = args.cutoff_b if args.cutoff_b is not None else (base.n_b_max if base else args.cutoff_c)
        nc = args.cutoff_c if args.cutoff_c is not None else (base.n_c_max if base else args.cutoff_b)
        try:
            cfg.cutoff = CutoffSpec(nb, nc)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if args.margin is not None:
        cfg.interior_margin = args.margin
    if args.tol is not None:
        cfg.tolerances["*"] = args.tol
    for key, val in args.tolerance:
        cfg.tolerances[key] = val
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.output_dir = args.out
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "sweep" and not args.config:
            raise ConfigError("sweep requires --config")
        if args.command == "converge":
            report = convergence_study(args.check_id, cfg, start=args.start, cap=args.cap)
            reports = [report]
            out_dir = resolve_output_dir(cfg)
            if out_dir is not None:
                write_outputs(reports, make_manifest(cfg, reports), out_dir)
        else:
            _, reports = run_suite(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"fockcheck: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit_report(reports, args.format, sys.stdout)
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
