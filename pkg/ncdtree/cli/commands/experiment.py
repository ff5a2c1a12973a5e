import argparse
import sys
from pathlib import Path

from ncdtree.cli.common import codec_from_args, codec_options, search_config_from_args, search_options, write_manifest, write_text
from ncdtree.core.exceptions import ExitCode
from ncdtree.services.experiment_service import EXPERIMENTS, run_experiment


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("experiment", help="controlled clustering experiments")
    actions = parser.add_subparsers(dest="action", required=True)
    run_parser = actions.add_parser(
        "run",
        parents=[codec_options(), search_options()],
        help="run one experiment and check its outcome",
    )
    run_parser.add_argument("name", choices=EXPERIMENTS)
    run_parser.add_argument("--leaves", type=int, default=10, help="leaves of the randomtree generator (default: 10)")
    run_parser.add_argument("--out", help="directory for the matrix, tree and report")
    run_parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    """Run one controlled experiment and write its artifacts when --out is given."""
    codec = codec_from_args(args)
    config = search_config_from_args(args)
    report = run_experiment(args.name, codec, config, leaves=args.leaves, workers=args.workers)
    text = report.to_text() + "\n"
    if args.out:
        out = Path(args.out)
        artifacts = [
            write_text(out / f"{args.name}.matrix", report.matrix.to_text()),
            write_text(out / f"{args.name}.tree.dot", report.tree.to_dot()),
            write_text(out / f"{args.name}.report.txt", text),
        ]
        if report.reference_tree is not None:
            artifacts.append(write_text(out / f"{args.name}.generator.dot", report.reference_tree.to_dot()))
        write_manifest(
            args, out / args.name, artifacts=artifacts, codec=codec, seed=config.seed,
            parameters={"experiment": args.name, "leaves": args.leaves},
        )
    sys.stdout.write(text)
    return ExitCode.OK if report.passed else ExitCode.AUDIT_FAILED
