"""`phsums sample`: draw one seeded point cloud"""
import argparse

from worker.geometry import cloud_to_csv_text
from worker.tasks import trial_cloud

from ..errors import ConfigError
from .common import add_common, add_sampling_source, dump_json, experiment_config, write_output


def register(subparsers) -> None:
    parser = subparsers.add_parser("sample", help="Sample a point cloud from a measure")
    add_common(parser, out_help="Directory for the cloud file (default: stdout)")
    add_sampling_source(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if args.n is None or args.n < 0:
        raise ConfigError("--n must be given and >= 0")
    config = experiment_config(args, out_is_dir=False)
    cloud = trial_cloud(config, args.n, args.trial)

    if args.format == "csv":
        text, name = cloud_to_csv_text(cloud), f"cloud_n{args.n}_t{args.trial}.csv"
    else:
        payload = {
            "space": cloud.space.model_dump(),
            "seed": config.seed,
            "trial": args.trial,
            "points": cloud.points.tolist(),
        }
        text, name = dump_json(payload), f"cloud_n{args.n}_t{args.trial}.json"
    write_output(text, args.out, name)
    return 0
