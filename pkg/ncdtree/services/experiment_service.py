"""Controlled clustering experiments on generated and bundled data.

randomtree
    Distances read off a random tree, d(a, b) = (L(a, b) + 1) / n with L the
    number of edges between the leaves. The search should recover the tree.
tags
    Random files stamped with shared 1 KiB tags; files sharing tags should be
    closer and cluster together.
filetypes
    Text, C source, executables and four-letter sequences; each type should
    form its own clade.
"""
import itertools
import logging
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ncdtree.core.exceptions import InvalidInput
from ncdtree.core.rng import make_rng
from ncdtree.data import data_file, load_yaml
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.codec import Codec
from ncdtree.schemas.document import Document
from ncdtree.schemas.experiment import ExperimentReport, TagSpec
from ncdtree.schemas.search import SearchConfig
from ncdtree.services.ncd_service import audit_metric, build_matrix
from ncdtree.services.quartet_service import quartet_agreement
from ncdtree.services.search_service import hill_climb, random_tree

logger = logging.getLogger(__name__)

EXPERIMENTS = ("randomtree", "tags", "filetypes")
TAGS_MIN_SCORE = 0.85
GENOME_ALPHABET = np.frombuffer(b"ACGT", dtype=np.uint8)


def gen_random_tree_metric(n: int, seed: int) -> Tuple[ClusterTree, DistanceMatrix]:
    if n < 4:
        raise InvalidInput(f"a generating tree needs at least 4 leaves, got {n}", details={"n": n})
    labels = [f"leaf{i:02d}" for i in range(n)]
    tree = random_tree(labels, make_rng(seed))
    values = (tree.leaf_distances(order=labels) + 1) / n
    np.fill_diagonal(values, 0.0)
    return tree, DistanceMatrix(labels, values, {"generator": "random-tree-metric", "seed": seed})


def gen_tag_corpus(spec: Optional[TagSpec] = None, seed: int = 1) -> List[Document]:
    """Random files overstamped with copies of shared tags; labels are the tag sets."""
    spec = spec or TagSpec()
    rng = make_rng(seed)
    tags = {name: rng.bytes(spec.tag_size) for name in spec.tag_names}
    docs = []
    for subset in spec.assignments:
        content = bytearray(rng.bytes(spec.file_size))
        for name in subset:
            for _ in range(spec.placements):
                offset = int(rng.integers(0, spec.file_size - spec.tag_size + 1))
                content[offset:offset + spec.tag_size] = tags[name]
        docs.append(Document(label=subset, content=bytes(content)))
    return docs


def shared_tag_means(matrix: DistanceMatrix) -> Dict[int, float]:
    """Mean distance over label pairs grouped by the number of tags they share."""
    groups: Dict[int, List[float]] = defaultdict(list)
    for i, j in itertools.combinations(range(matrix.size), 2):
        shared = len(set(matrix.labels[i]) & set(matrix.labels[j]))
        groups[shared].append(float(matrix.values[i, j]))
    return {shared: float(np.mean(values)) for shared, values in sorted(groups.items())}


def _mutate(sequence: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    mutated = sequence.copy()
    hits = rng.random(len(sequence)) < rate
    mutated[hits] = GENOME_ALPHABET[rng.integers(0, 4, int(hits.sum()))]
    return mutated


def synthetic_genomes(
    labels: Sequence[str],
    length: int,
    seed: int,
    lineage_mutation_rate: float,
    member_mutation_rate: float,
) -> List[Document]:
    """Four-letter sequences descending from one ancestor, two members per lineage."""
    rng = make_rng(seed)
    ancestor = GENOME_ALPHABET[rng.integers(0, 4, length)]
    docs = []
    for start in range(0, len(labels), 2):
        lineage = _mutate(ancestor, lineage_mutation_rate, rng)
        for label in labels[start:start + 2]:
            docs.append(Document(label=label, content=_mutate(lineage, member_mutation_rate, rng).tobytes()))
    return docs


def load_filetypes_corpus() -> Tuple[List[Document], Dict[str, List[str]]]:
    manifest = load_yaml("filetypes.yaml")
    docs: List[Document] = []
    groups: Dict[str, List[str]] = {}
    for group, entries in manifest["groups"].items():
        for entry in entries:
            content = data_file(*entry["file"].split("/")).read_bytes()
            offset = entry.get("offset", 0)
            length = entry.get("length", len(content) - offset)
            docs.append(Document(label=entry["label"], content=content[offset:offset + length]))
        groups[group] = [entry["label"] for entry in entries]
    genome = manifest["genome"]
    docs.extend(synthetic_genomes(
        genome["labels"],
        genome["length"],
        genome["seed"],
        genome["lineage_mutation_rate"],
        genome["member_mutation_rate"],
    ))
    groups["genome"] = list(genome["labels"])
    return docs, groups


def _run_randomtree(config: SearchConfig, leaves: int) -> ExperimentReport:
    generator, matrix = gen_random_tree_metric(leaves, config.seed)
    tree, tree_score, trace = hill_climb(matrix, config)
    audit = audit_metric(matrix)
    agreement = quartet_agreement(tree, generator)
    return ExperimentReport(
        name="randomtree",
        matrix=matrix,
        tree=tree,
        score=tree_score,
        reference_tree=generator,
        checks={
            "perfect score": tree_score.is_perfect(config.s_one_epsilon),
            "generating topology recovered": agreement == 1.0,
            "matrix is a metric": audit.max_triangle_violation == 0.0 and audit.max_symmetry_deviation == 0.0,
        },
        measurements={
            "leaves": leaves,
            "quartet agreement with generator": agreement,
            "candidates": trace.total_candidates,
            "halt": trace.halt_reason.value,
        },
    )


def _run_tags(codec: Codec, config: SearchConfig, spec: Optional[TagSpec], workers: Optional[int]) -> ExperimentReport:
    docs = gen_tag_corpus(spec, config.seed)
    matrix = build_matrix(codec, docs, workers=workers)
    tree, tree_score, trace = hill_climb(matrix, config)
    means = shared_tag_means(matrix)
    sharing = [
        float(matrix.values[i, j])
        for i, j in itertools.combinations(range(matrix.size), 2)
        if set(matrix.labels[i]) & set(matrix.labels[j])
    ]
    return ExperimentReport(
        name="tags",
        matrix=matrix,
        tree=tree,
        score=tree_score,
        checks={
            "sharing tags lowers NCD": bool(sharing) and float(np.mean(sharing)) < means[0],
            "NCD decreases with 0, 1, 2 shared tags": means[0] > means.get(1, np.inf) > means.get(2, np.inf),
            f"S(T) >= {TAGS_MIN_SCORE}": tree_score.S >= TAGS_MIN_SCORE,
        },
        measurements={
            "mean NCD by shared tags": {k: round(v, 6) for k, v in means.items()},
            "candidates": trace.total_candidates,
            "halt": trace.halt_reason.value,
        },
    )


def _run_filetypes(codec: Codec, config: SearchConfig, workers: Optional[int]) -> ExperimentReport:
    docs, groups = load_filetypes_corpus()
    matrix = build_matrix(codec, docs, workers=workers)
    tree, tree_score, trace = hill_climb(matrix, config)
    return ExperimentReport(
        name="filetypes",
        matrix=matrix,
        tree=tree,
        score=tree_score,
        checks={f"{group} forms a clade": tree.forms_clade(labels) for group, labels in groups.items()},
        measurements={
            "groups": {group: len(labels) for group, labels in groups.items()},
            "candidates": trace.total_candidates,
            "halt": trace.halt_reason.value,
        },
    )


def run_experiment(
    name: str,
    codec: Optional[Codec] = None,
    config: Optional[SearchConfig] = None,
    leaves: int = 10,
    tag_spec: Optional[TagSpec] = None,
    workers: Optional[int] = None,
) -> ExperimentReport:
    """Generate or load the named experiment's inputs, cluster them and check the outcome.

    The search seed also seeds the generated inputs.
    """
    config = config or SearchConfig()
    codec = codec or Codec.builtin("blocksort")
    logger.info(f"Running experiment {name} with compressor {codec.name}, seed {config.seed}")
    if name == "randomtree":
        report = _run_randomtree(config, leaves)
    elif name == "tags":
        report = _run_tags(codec, config, tag_spec, workers)
    elif name == "filetypes":
        report = _run_filetypes(codec, config, workers)
    else:
        raise InvalidInput(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    logger.info(f"Experiment {name}: S(T)={report.score.S:.6f}, {'passed' if report.passed else 'failed'}")
    return report
