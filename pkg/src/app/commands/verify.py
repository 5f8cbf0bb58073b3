"""`phsums verify`: the cross-module oracle battery"""
import argparse

from ..config import settings
from ..verify import DEFAULT_SIZES, run_verify
from .common import add_common, emit_report


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Run the oracle and property checks")
    add_common(parser, out_help="Directory for scaling.csv and report.json (optional)")
    parser.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SIZES), help="Square PH_1 sample sizes")
    parser.add_argument("--trials", type=int, help="Trials per size")
    parser.add_argument("--inject-fault", action="store_true", help="Plant a barcode with b > d")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    report = run_verify(
        seed=args.seed if args.seed is not None else 0,
        sizes=args.sizes,
        inject_fault=args.inject_fault,
        jobs=args.jobs if args.jobs is not None else settings.jobs,
        trials=args.trials,
        output_dir=args.out,
    )
    return emit_report(report, args.format)
