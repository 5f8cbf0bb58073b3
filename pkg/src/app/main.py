import argparse
import logging
import sys
from typing import List, Optional

from .commands import COMMANDS
from .config import settings
from .errors import PhSumsError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Weighted persistent-homology sums of random point clouds and their scaling laws",
    )
    parser.add_argument("--log-level", help=f"Logging level (default {settings.log_level})")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # 서브커맨드 등록
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point; exit code 0 when every verdict passes, 1 on a failed verdict, 2 on an error"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except PhSumsError as e:
        logger.error(f"{e.__class__.__name__}: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
