import argparse
import logging
import sys

from ncdtree.cli.common import write_manifest, write_text
from ncdtree.core.exceptions import ExitCode
from ncdtree.schemas.ncd import ScalingMode
from ncdtree.services.ncd_service import block_frequency_distance, expand_paths, load_documents

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "blockdist",
        help="Euclidean distance of overlapping block-frequency vectors",
    )
    parser.add_argument("inputs", nargs="+", help="files or directories")
    parser.add_argument("-k", "--block-length", type=int, default=6, help="block length (default: 6)")
    parser.add_argument("--alphabet", default="ACGT", help="allowed bytes (default: ACGT)")
    parser.add_argument(
        "--scaling", choices=[mode.value for mode in ScalingMode], default=ScalingMode.LINEAR.value,
        help="rescaling of the distances (default: linear)",
    )
    parser.add_argument("--out", help="matrix file (default: standard output, no manifest)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    """Write the block-frequency distance matrix of the inputs."""
    docs = load_documents(args.inputs)
    matrix = block_frequency_distance(
        docs, args.block_length, args.alphabet.encode("latin-1"), ScalingMode(args.scaling)
    )
    text = matrix.to_text()
    if not args.out:
        sys.stdout.write(text)
        return ExitCode.OK
    write_text(args.out, text)
    write_manifest(
        args, args.out, artifacts=[args.out], inputs=expand_paths(args.inputs),
        parameters={"k": args.block_length, "alphabet": args.alphabet, "scaling": args.scaling},
    )
    return ExitCode.OK
