import argparse
import logging
from pathlib import Path

from ncdtree.cli.common import seed_options, write_manifest, write_text
from ncdtree.core.exceptions import ExitCode
from ncdtree.schemas.experiment import TagSpec
from ncdtree.services.experiment_service import gen_random_tree_metric, gen_tag_corpus

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("gen", help="generate experiment inputs")
    kinds = parser.add_subparsers(dest="kind", required=True)

    tags = kinds.add_parser("tags", parents=[seed_options()], help="artificial tag-file corpus")
    tags.add_argument("--out", required=True, help="directory for the files")
    tags.add_argument("--tag-size", type=int, default=1024, help="bytes per tag (default: 1024)")
    tags.add_argument("--file-size", type=int, default=81920, help="bytes per file (default: 81920)")
    tags.add_argument("--placements", type=int, default=10, help="copies stamped per tag (default: 10)")
    tags.set_defaults(func=run_tags)

    tree = kinds.add_parser("tree", parents=[seed_options()], help="random tree and its path-length metric")
    tree.add_argument("--leaves", type=int, default=18, help="number of leaves (default: 18)")
    tree.add_argument("--out", required=True, help="matrix file; the tree goes to OUT with .tree.dot")
    tree.set_defaults(func=run_tree)


def run_tags(args: argparse.Namespace) -> int:
    """Write the tag-file corpus and its manifest."""
    spec = TagSpec(tag_size=args.tag_size, file_size=args.file_size, placements=args.placements)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for doc in gen_tag_corpus(spec, args.seed):
        (out / doc.label).write_bytes(doc.content)
    write_manifest(args, out, artifacts=[out], seed=args.seed, parameters=spec.model_dump())
    logger.info(f"Wrote {len(spec.assignments)} tag files to {out}")
    return ExitCode.OK


def run_tree(args: argparse.Namespace) -> int:
    """Write a random tree, its path-length matrix and their manifest."""
    tree, matrix = gen_random_tree_metric(args.leaves, args.seed)
    out = Path(args.out)
    tree_path = out.with_name(out.stem + ".tree.dot")
    write_text(out, matrix.to_text())
    write_text(tree_path, tree.to_dot())
    write_manifest(args, out, artifacts=[out, tree_path], seed=args.seed, parameters={"leaves": args.leaves})
    return ExitCode.OK
