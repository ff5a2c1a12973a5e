import argparse
import sys
from pathlib import Path

from ncdtree.core.exceptions import ExitCode, InputReadError
from ncdtree.services.quartet_service import parse_dot, quartet_agreement


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("compare", help="quartet agreement of two DOT trees over the same labels")
    parser.add_argument("first")
    parser.add_argument("second")
    parser.set_defaults(func=run)


def _read_tree(path: str):
    try:
        return parse_dot(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as e:
        raise InputReadError(path, str(e))


def run(args: argparse.Namespace) -> int:
    """Print the quartet agreement of two tree files."""
    first, second = _read_tree(args.first), _read_tree(args.second)
    agreement = quartet_agreement(first, second)
    sys.stdout.write(f"quartet_agreement={agreement:.6f}\nsame_topology={str(first == second).lower()}\n")
    return ExitCode.OK
