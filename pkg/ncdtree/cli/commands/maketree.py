import argparse
import logging
import sys
from pathlib import Path

from ncdtree.cli.common import search_config_from_args, search_options, write_manifest, write_text
from ncdtree.core.exceptions import ExitCode
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.services.quartet_service import export
from ncdtree.services.search_service import hill_climb, hill_climb_restarts

logger = logging.getLogger(__name__)

SUFFIXES = {"dot": ".dot", "newick": ".nwk"}


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "maketree",
        parents=[search_options()],
        help="search for the tree that best fits a distance matrix",
        description="Hill-climb over unrooted ternary trees, write the best tree and the progress "
                    "trace, and print its normalized benefit score S(T).",
    )
    parser.add_argument("matrix", help="matrix file in the ncd text format")
    parser.add_argument("--format", choices=sorted(SUFFIXES), default="dot", help="tree format (default: dot)")
    parser.add_argument("--out", help="tree file (default: MATRIX with .tree.dot or .tree.nwk)")
    parser.add_argument("--trace", help="progress CSV (default: OUT with .trace.csv)")
    parser.add_argument("--restarts", type=int, default=1, help="independent searches; the best tree is kept")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    """Search for the best tree and write it with its trace and manifest."""
    matrix = DistanceMatrix.read(args.matrix)
    if not matrix.is_symmetric():
        logger.warning(
            f"Matrix {args.matrix} is asymmetric (max deviation {matrix.max_asymmetry():.6g}); "
            "searching on its symmetrized mean"
        )
        matrix = matrix.symmetrized()
    config = search_config_from_args(args)

    summary = None
    if args.restarts > 1:
        tree, tree_score, trace, summary = hill_climb_restarts(matrix, config, args.restarts)
    else:
        tree, tree_score, trace = hill_climb(matrix, config)

    out = Path(args.out) if args.out else Path(args.matrix).with_name(
        Path(args.matrix).name + ".tree" + SUFFIXES[args.format]
    )
    trace_path = Path(args.trace) if args.trace else out.with_name(out.name + ".trace.csv")
    write_text(out, export(tree, args.format))
    write_text(trace_path, trace.to_csv())
    write_manifest(
        args,
        out,
        artifacts=[out, trace_path],
        inputs=[args.matrix],
        seed=config.seed,
        parameters={
            "format": args.format,
            "max_stale": config.max_stale,
            "time_budget": config.time_budget,
            "workers": config.workers,
            "restarts": args.restarts,
            "halt_reason": trace.halt_reason.value,
            "total_candidates": trace.total_candidates,
        },
    )
    if summary is not None:
        sys.stdout.write(summary.to_text() + "\n")
    sys.stdout.write(f"S(T)={tree_score.S:.6f}\n")
    return ExitCode.OK
