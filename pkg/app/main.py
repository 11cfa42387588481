import argparse
import logging
import sys

from app.commands import codes, decode, simulate
from app.commands.common import UsageError
from app.config import LOG_FORMAT, LOG_LEVEL

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class CliParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(prog="mp-ldpc", description="MP-XOR-SAT LDPC decoding toolkit")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Logging level (env MP_LDPC_LOG_LEVEL).")
    subparsers = parser.add_subparsers(dest="command", required=True)

    decode.register(subparsers)
    simulate.register(subparsers)
    codes.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code is None:
            return EXIT_OK
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    level = logging.getLevelName(args.log_level.upper())
    if not isinstance(level, int):
        print(f"{parser.prog}: error: unknown log level {args.log_level!r}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    try:
        args.handler(args)
    except UsageError as e:
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, RuntimeError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"{parser.prog} {args.command}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
