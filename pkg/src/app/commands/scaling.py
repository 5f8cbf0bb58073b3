"""`phsums scaling`: Monte Carlo scaling run over the config's n grid"""
import argparse

from ..errors import ConfigError
from ..harness import run_scaling
from .common import add_common, emit_report, experiment_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("scaling", help="Run trials over n_grid, fit and judge the scaling laws")
    add_common(parser, out_help="Run directory (trials/, scaling.csv, report.json)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if not args.config:
        raise ConfigError("scaling needs --config")
    report = run_scaling(experiment_config(args))
    return emit_report(report, args.format)
