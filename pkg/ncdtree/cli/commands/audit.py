import argparse
import sys

from ncdtree.cli.common import codec_from_args, codec_options, workers_options
from ncdtree.core.config import settings
from ncdtree.core.exceptions import ExitCode
from ncdtree.data import data_file
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.services.compressor_service import CompressorService
from ncdtree.services.ncd_service import audit_metric, load_documents

DEFAULT_TOLERANCE = 0.1


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("audit", help="check compressor or matrix axioms")
    subjects = parser.add_subparsers(dest="subject", required=True)

    compressor = subjects.add_parser(
        "compressor",
        parents=[codec_options(), workers_options()],
        help="empirical normal-compressor audit",
    )
    compressor.add_argument("corpus", nargs="*", help="files or directories (default: bundled text corpus)")
    compressor.add_argument("--alpha", type=float, default=None, help="slack bytes per log2(n)")
    compressor.add_argument("--beta", type=float, default=None, help="constant slack bytes")
    compressor.add_argument("--key-values", action="store_true", help="print key=value lines instead of text")
    compressor.set_defaults(func=run_compressor)

    matrix = subjects.add_parser("matrix", help="symmetry and triangle-inequality audit of a matrix")
    matrix.add_argument("matrix", help="matrix file")
    matrix.add_argument(
        "--tolerance", type=float, default=DEFAULT_TOLERANCE,
        help=f"allowed symmetry deviation and triangle violation (default: {DEFAULT_TOLERANCE:g})",
    )
    matrix.set_defaults(func=run_matrix)


def run_compressor(args: argparse.Namespace) -> int:
    """Audit a compressor for normality on the given corpus or the bundled texts."""
    codec = codec_from_args(args)
    paths = args.corpus or [str(data_file("corpus", "text"))]
    corpus = [doc.content for doc in load_documents(paths)]
    report = CompressorService().audit_normality(
        codec, corpus, args.alpha, args.beta, workers=args.workers or settings.DEFAULT_WORKERS
    )
    sys.stdout.write((report.to_key_values() if args.key_values else report.to_text()) + "\n")
    return ExitCode.OK if report.passed else ExitCode.AUDIT_FAILED


def run_matrix(args: argparse.Namespace) -> int:
    """Check a matrix file for symmetry and triangle-inequality violations."""
    report = audit_metric(DistanceMatrix.read(args.matrix), args.tolerance)
    sys.stdout.write(report.to_text() + "\n")
    return ExitCode.OK if report.passed else ExitCode.AUDIT_FAILED
