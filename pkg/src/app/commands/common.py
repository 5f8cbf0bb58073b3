"""Flags and output helpers shared by the subcommands"""
import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from ..errors import ConfigError
from ..harness import load_config, validate_config
from ..schemas.experiment import ExperimentConfig, RunReport

logger = logging.getLogger(__name__)


def add_common(parser: argparse.ArgumentParser, out_help: str = "Output directory") -> None:
    parser.add_argument("--config", help="Experiment config (.toml or .yaml)")
    parser.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    parser.add_argument("--out", help=out_help)
    parser.add_argument("--jobs", type=int, help="Worker processes (-1 for every core)")
    parser.add_argument("--format", choices=["csv", "json"], default="json", help="Output format")


def add_sampling_source(parser: argparse.ArgumentParser) -> None:
    """--measure / --n / --trial, for commands that draw their own cloud"""
    parser.add_argument("--measure", help="Inline measure mapping, e.g. '{kind: uniform_cube, m: 2}'")
    parser.add_argument("--n", type=int, help="Number of points")
    parser.add_argument("--trial", type=int, default=0, help="Trial index for seed derivation")


def overrides(args: argparse.Namespace, out_is_dir: bool = True) -> Dict[str, Any]:
    values = {"seed": args.seed, "jobs": args.jobs}
    if out_is_dir:
        values["output_dir"] = args.out
    return values


def experiment_config(args: argparse.Namespace, out_is_dir: bool = True, **extra: Any) -> ExperimentConfig:
    """
    Config from --config, or a minimal one built around --measure

    Args:
        args: Parsed CLI arguments
        out_is_dir: Whether --out names the run directory
        extra: Further top-level keys (None values ignored)
    """
    values = overrides(args, out_is_dir)
    values.update(extra)
    if args.config:
        return load_config(args.config, values)
    measure = getattr(args, "measure", None)
    if not measure:
        raise ConfigError("either --config or --measure is required")
    try:
        parsed = yaml.safe_load(measure)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse --measure: {e}")
    data = {"measure": parsed}
    data.update({k: v for k, v in values.items() if v is not None})
    return validate_config(data)


def write_output(text: str, out: Optional[str], name: str) -> None:
    """Write to <out>/<name>, or to stdout when no --out was given"""
    if out:
        target = Path(out)
        target.mkdir(parents=True, exist_ok=True)
        (target / name).write_text(text)
        logger.info(f"Wrote {target / name}")
    else:
        sys.stdout.write(text)


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def verdicts_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "status", "observed", "tolerance", "claim", "detail"])
    for v in report.verdicts:
        writer.writerow([v.name, v.status, json.dumps(v.observed), v.tolerance, v.claim, v.detail])
    return buf.getvalue()


def emit_report(report: RunReport, fmt: str) -> int:
    """Print the report and turn it into an exit code (0 pass, 1 any failed verdict)"""
    if fmt == "csv":
        sys.stdout.write(verdicts_csv(report))
    else:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    for v in report.failures():
        logger.warning(f"FAIL {v.name}: {v.claim} ({v.tolerance}) observed={v.observed} {v.detail}")
    return 0 if report.passed else 1
