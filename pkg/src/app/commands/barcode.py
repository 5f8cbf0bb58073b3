"""`phsums barcode`: persistence barcode of one cloud"""
import argparse
from typing import Tuple

from pydantic import ValidationError

from worker.geometry import read_cloud_csv
from worker.persistence import Barcode
from worker.tasks import build_barcode, trial_cloud

from ..errors import ConfigError
from ..schemas.experiment import ComplexSpec
from ..schemas.geometry import MetricSpaceSpec
from .common import add_common, add_sampling_source, dump_json, experiment_config, write_output


def add_barcode_source(parser: argparse.ArgumentParser) -> None:
    add_sampling_source(parser)
    parser.add_argument("--input", help="Point cloud CSV (header x0,x1,...) instead of sampling")
    parser.add_argument("--space", default="euclidean:2", help="Metric space of --input, e.g. sphere:2")
    parser.add_argument("--complex", choices=["alpha2d", "rips", "cech_oracle"], help="Complex kind")
    parser.add_argument("--degree", type=int, help="Highest homology degree (0 uses the MST)")
    parser.add_argument("--max-dim", type=int, help="Top simplex dimension (default degree + 1)")
    parser.add_argument("--radius", type=float, help="Fixed Rips truncation radius")


def register(subparsers) -> None:
    parser = subparsers.add_parser("barcode", help="Compute the barcode of a sampled or given cloud")
    add_common(parser, out_help="Directory for the barcode file (default: stdout)")
    add_barcode_source(parser)
    parser.set_defaults(handler=handle)


def _complex_spec(base: ComplexSpec, args: argparse.Namespace) -> ComplexSpec:
    data = base.model_dump()
    if args.complex:
        data["kind"] = args.complex
    if args.max_dim is not None:
        data["max_dim"] = args.max_dim
    if args.radius is not None:
        data.update(scale_rule="fixed", radius=args.radius)
    try:
        return ComplexSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid complex options: {e}")


def load_barcode(args: argparse.Namespace) -> Tuple[Barcode, int]:
    """Barcode from --input or from a sampled cloud, plus the degree it was computed to"""
    if args.input:
        try:
            space = MetricSpaceSpec.parse(args.space)
        except (ValueError, ValidationError) as e:
            raise ConfigError(str(e))
        cloud = read_cloud_csv(args.input, space)
        spec = _complex_spec(ComplexSpec(), args)
        degree = args.degree if args.degree is not None else 1
        m = space.m
    else:
        if args.n is None:
            raise ConfigError("--n is required when sampling")
        config = experiment_config(args, out_is_dir=False, degree=args.degree)
        cloud = trial_cloud(config, args.n, args.trial)
        spec = _complex_spec(config.complex, args)
        degree, m = config.degree, config.intrinsic_dim
    barcode, _ = build_barcode(cloud, spec, degree, m)
    return barcode, degree


def handle(args: argparse.Namespace) -> int:
    barcode, _ = load_barcode(args)
    if args.format == "csv":
        write_output(barcode.to_csv_text(), args.out, "barcode.csv")
    else:
        payload = {
            "intervals": {str(i): arr.tolist() for i, arr in sorted(barcode.intervals.items())},
            "essential": {str(i): b.tolist() for i, b in sorted(barcode.essential.items())},
            "n_components": barcode.n_components,
        }
        write_output(dump_json(payload), args.out, "barcode.json")
    return 0
