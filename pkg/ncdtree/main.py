import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from ncdtree import __version__
from ncdtree.cli.commands import COMMAND_MODULES
from ncdtree.core.config import settings
from ncdtree.core.exceptions import ExitCode, ToolkitException

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(verbosity: int = 0) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Compression-based clustering: NCD matrices, compressor and metric audits, "
                    "and quartet-tree search.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for module in COMMAND_MODULES:
        module.register(subparsers)
    return parser


def render_error(code: str, message: str, details: Optional[dict] = None) -> str:
    return json.dumps({"error": {"code": code, "message": message, "details": details or {}}}, indent=2, default=str)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.command_line = [settings.PROJECT_NAME, *argv]
    configure_logging(args.verbose)

    try:
        return int(args.func(args))
    except ToolkitException as exc:
        logger.debug(f"{exc.code}: {exc.message}", exc_info=True)
        print(render_error(exc.code, exc.message, exc.details), file=sys.stderr)
        return int(exc.exit_code)
    except ValidationError as exc:
        print(
            render_error("invalid_input", "Input validation error", {"errors": exc.errors(include_url=False)}),
            file=sys.stderr,
        )
        return int(ExitCode.INVALID_INPUT)
    except Exception as exc:
        logger.exception(f"Unhandled error: {exc}")
        print(render_error("internal_error", "An unexpected error occurred"), file=sys.stderr)
        return int(ExitCode.INTERNAL_ERROR)
