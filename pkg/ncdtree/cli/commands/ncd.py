import argparse
import logging
import sys

from ncdtree.cli.common import codec_from_args, codec_options, mode_options, workers_options, write_manifest, write_text
from ncdtree.core.exceptions import ExitCode
from ncdtree.schemas.ncd import NcdMode
from ncdtree.services.ncd_service import build_matrix, expand_paths, load_documents

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "ncd",
        parents=[codec_options(), mode_options(), workers_options()],
        help="compute the pairwise NCD matrix of files",
        description="Compute the NCD matrix of the given files (directories contribute their files "
                    "in lexicographic order). Labels are file names with whitespace replaced by '_'.",
    )
    parser.add_argument("inputs", nargs="+", help="files or directories")
    parser.add_argument("--out", help="matrix file (default: standard output, no manifest)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    """Compute the NCD matrix.

    Without --out the matrix goes to standard output and no file or manifest is written.
    """
    codec = codec_from_args(args)
    docs = load_documents(args.inputs)
    matrix = build_matrix(
        codec, docs, NcdMode(args.mode), symmetrize=args.symmetrize, workers=args.workers,
        zero_diagonal=args.zero_diagonal,
    )
    text = matrix.to_text()
    if not args.out:
        sys.stdout.write(text)
        return ExitCode.OK
    write_text(args.out, text)
    write_manifest(
        args,
        args.out,
        artifacts=[args.out],
        inputs=expand_paths(args.inputs),
        codec=codec,
        parameters={
            "mode": args.mode,
            "symmetrize": args.symmetrize,
            "zero_diagonal": args.zero_diagonal,
            "labels": matrix.labels,
        },
    )
    logger.info(f"Wrote {matrix.size}x{matrix.size} matrix to {args.out}")
    return ExitCode.OK
