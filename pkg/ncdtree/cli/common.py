"""Options and artifact plumbing shared by the command modules."""
import argparse
import hashlib
import logging
import shlex
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from ncdtree.core.config import settings
from ncdtree.schemas.codec import BUILTIN_NAMES, Codec
from ncdtree.schemas.manifest import RunManifest
from ncdtree.schemas.ncd import NcdMode
from ncdtree.schemas.search import SearchConfig
from ncdtree.services.compressor_service import CompressorService

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def codec_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("compressor")
    choice = group.add_mutually_exclusive_group()
    choice.add_argument(
        "--compressor", choices=sorted(BUILTIN_NAMES), default="blocksort",
        help="builtin compressor (default: blocksort)",
    )
    choice.add_argument(
        "--compressor-cmd", metavar="ARGV",
        help='external compressor reading stdin and writing stdout, e.g. "xz -9 -c"',
    )
    return parent


def mode_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--mode", choices=[mode.value for mode in NcdMode], default=NcdMode.PLAIN.value,
        help="NCD numerator: C(xy), or min{C(xy), C(yx)} (default: plain)",
    )
    parent.add_argument(
        "--no-symmetrize", dest="symmetrize", action="store_false",
        help="keep the raw asymmetric matrix",
    )
    parent.add_argument(
        "--zero-diagonal", action="store_true",
        help="store 0 on the diagonal instead of the computed NCD(x, x)",
    )
    return parent


def workers_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--workers", type=int, default=None,
        help=f"worker threads (default: {settings.DEFAULT_WORKERS})",
    )
    return parent


def seed_value(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if seed < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {seed}")
    return seed


def seed_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=seed_value, default=0, help="random seed (default: 0)")
    return parent


def search_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False, parents=[seed_options(), workers_options()])
    group = parent.add_argument_group("tree search")
    group.add_argument(
        "--max-stale", type=int, default=None,
        help=f"halt after this many non-improving candidates (default: {settings.MAX_STALE})",
    )
    group.add_argument("--time-budget", type=float, default=None, help="wall-clock budget in seconds")
    group.add_argument("--trace-every", type=int, default=None, help="extra trace row every N candidates")
    group.add_argument("--check-invariants", action="store_true", help="validate every candidate tree")
    return parent


def codec_from_args(args: argparse.Namespace) -> Codec:
    if getattr(args, "compressor_cmd", None):
        return Codec.external(shlex.split(args.compressor_cmd))
    return Codec.builtin(args.compressor)


def search_config_from_args(args: argparse.Namespace) -> SearchConfig:
    overrides: Dict[str, Any] = {
        "seed": args.seed,
        "workers": args.workers or settings.DEFAULT_WORKERS,
        "time_budget": args.time_budget,
        "check_invariants": args.check_invariants,
    }
    if args.max_stale is not None:
        overrides["max_stale"] = args.max_stale
    if args.trace_every is not None:
        overrides["trace_every"] = args.trace_every
    return SearchConfig(**overrides)


def sha256_file(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return path


def manifest_path(artifact: PathLike) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


def write_manifest(
    args: argparse.Namespace,
    primary: PathLike,
    artifacts: Iterable[PathLike],
    inputs: Iterable[PathLike] = (),
    codec: Optional[Codec] = None,
    seed: Optional[int] = None,
    parameters: Optional[Dict[str, Any]] = None,
) -> Path:
    """Provenance record written next to ``primary``."""
    manifest = RunManifest(
        command_line=list(getattr(args, "command_line", [])),
        seed=seed,
        codec=CompressorService().describe_codec(codec) if codec else None,
        input_digests={str(path): sha256_file(path) for path in inputs},
        artifact_digests=_artifact_digests(artifacts),
        parameters=parameters or {},
    )
    target = write_text(manifest_path(primary), manifest.model_dump_json(indent=2) + "\n")
    logger.info(f"Wrote manifest {target}")
    return target


def _artifact_digests(artifacts: Iterable[PathLike]) -> Dict[str, str]:
    digests = {}
    for artifact in artifacts:
        path = Path(artifact)
        if path.is_dir():
            for child in sorted(path.iterdir()):
                if child.is_file():
                    digests[str(child)] = sha256_file(child)
        else:
            digests[str(path)] = sha256_file(path)
    return digests

