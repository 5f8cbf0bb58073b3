"""`phsums dimension`: PH-dimension estimate m_hat = alpha / (1 - slope)"""
import argparse

from ..errors import ConfigError
from ..harness import run_dimension
from .common import add_common, emit_report, experiment_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("dimension", help="Estimate the PH-dimension of the configured measure")
    add_common(parser, out_help="Run directory")
    parser.add_argument(
        "--alpha-scan",
        type=float,
        nargs="+",
        help="Also estimate at these alphas (each in its own sub-directory)",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if not args.config:
        raise ConfigError("dimension needs --config")
    report = run_dimension(experiment_config(args, alpha_scan=args.alpha_scan))
    return emit_report(report, args.format)
