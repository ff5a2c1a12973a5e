"""Normalized compression distance, distance matrices and their audits."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import sparse
from scipy.sparse.linalg import norm as sparse_norm
from scipy.spatial.distance import pdist, squareform

from ncdtree.core.config import settings
from ncdtree.core.exceptions import (
    DegenerateInput,
    DuplicateLabel,
    InputReadError,
    InvalidInput,
    ToolkitException,
)
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.audit import MetricAuditReport
from ncdtree.schemas.codec import Codec
from ncdtree.schemas.document import Document
from ncdtree.schemas.ncd import NcdMode, ScalingMode
from ncdtree.services.compressor_service import CompressorService

logger = logging.getLogger(__name__)

# NCD values above 1 + this are flagged as out of range.
NCD_EPSILON = 0.1
DENSE_DIMENSION_LIMIT = 2 ** 20


def _require_content(*docs: Document) -> None:
    for doc in docs:
        if not doc.content:
            raise InvalidInput(f"document {doc.label!r} is empty", details={"label": doc.label})


def ncd_from_lengths(cx: int, cy: int, cxy: int, cyx: Optional[int] = None, mode: NcdMode = NcdMode.PLAIN) -> float:
    """NCD from code lengths C(x), C(y), C(xy) and, for symmetric-min, C(yx)."""
    numerator = cxy if mode == NcdMode.PLAIN else min(cxy, cyx if cyx is not None else cxy)
    denominator = max(cx, cy)
    if denominator == 0:
        raise DegenerateInput("NCD is undefined when both code lengths are 0", details={"cx": cx, "cy": cy})
    return (numerator - min(cx, cy)) / denominator


def ncd(
    codec: Codec,
    x: Document,
    y: Document,
    mode: NcdMode = NcdMode.PLAIN,
    service: Optional[CompressorService] = None,
) -> float:
    _require_content(x, y)
    service = service or CompressorService()
    cx = service.code_length(codec, x.content)
    cy = service.code_length(codec, y.content)
    cxy = service.concat_code_length(codec, x.content, y.content)
    cyx = service.concat_code_length(codec, y.content, x.content) if mode == NcdMode.SYMMETRIC_MIN else None
    return ncd_from_lengths(cx, cy, cxy, cyx, mode)


def conditional_information(codec: Codec, x: Document, y: Document, service: Optional[CompressorService] = None) -> int:
    """C(y|x) = C(xy) - C(x)."""
    _require_content(x, y)
    service = service or CompressorService()
    return service.concat_code_length(codec, x.content, y.content) - service.code_length(codec, x.content)


def check_documents(docs: Sequence[Document], minimum: int = 2) -> None:
    """Reject corpora that are too small or repeat a label."""
    if len(docs) < minimum:
        raise InvalidInput(f"need at least {minimum} documents, got {len(docs)}", details={"count": len(docs)})
    seen = set()
    for doc in docs:
        if doc.label in seen:
            raise DuplicateLabel(doc.label)
        seen.add(doc.label)


def build_matrix(
    codec: Codec,
    docs: Sequence[Document],
    mode: NcdMode = NcdMode.PLAIN,
    symmetrize: bool = True,
    workers: Optional[int] = None,
    service: Optional[CompressorService] = None,
    zero_diagonal: bool = False,
) -> DistanceMatrix:
    """Pairwise NCD matrix.

    The diagonal holds the computed NCD(x, x) unless ``zero_diagonal`` is set;
    tree search never reads it.
    """
    check_documents(docs)
    _require_content(*docs)
    service = service or CompressorService()
    workers = workers or settings.DEFAULT_WORKERS
    n = len(docs)
    logger.info(f"Building {n}x{n} NCD matrix with {codec.name} ({mode.value}, {workers} workers)")

    single = service.code_lengths(codec, [doc.content for doc in docs], workers)
    first = 1 if zero_diagonal else 0
    pairs: List[Tuple[int, int]] = [(i, j) for i in range(n) for j in range(i + first, n)]

    def compute(pair: Tuple[int, int]) -> Tuple[float, float]:
        i, j = pair
        x, y = docs[i], docs[j]
        try:
            cxy = service.concat_code_length(codec, x.content, y.content)
            cyx = cxy if i == j else service.concat_code_length(codec, y.content, x.content)
            forward = ncd_from_lengths(single[i], single[j], cxy, cyx, mode)
            backward = ncd_from_lengths(single[j], single[i], cyx, cxy, mode)
        except ToolkitException as e:
            logger.error(f"NCD failed on pair ({x.label}, {y.label}): {e.message}")
            e.message = f"{e.message} (pair {x.label}, {y.label})"
            e.details = {**e.details, "pair": [x.label, y.label]}
            raise
        return forward, backward

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(pair) for pair in pairs]

    values = np.zeros((n, n), dtype=np.float64)
    for (i, j), (forward, backward) in zip(pairs, results):
        values[i, j] = forward
        values[j, i] = backward

    out_of_range = int(np.count_nonzero((values < 0) | (values > 1 + NCD_EPSILON)))
    if out_of_range:
        logger.warning(f"{out_of_range} NCD entries fall outside [0, {1 + NCD_EPSILON:g}]; kept as computed")

    matrix = DistanceMatrix(
        [doc.label for doc in docs],
        values,
        {"codec": codec.name, "mode": mode.value, "symmetrized": False, "zero_diagonal": zero_diagonal},
    )
    logger.info(f"NCD matrix complete; max asymmetry {matrix.max_asymmetry():.6g}")
    return matrix.symmetrized() if symmetrize else matrix


def render_matrix(m: DistanceMatrix, digits: int = 3) -> str:
    """Display form of ``m`` with entries truncated to ``digits`` decimals."""
    return m.render(digits)


def audit_metric(m: DistanceMatrix, tolerance: float = 0.0) -> MetricAuditReport:
    """Exhaustive symmetry and triangle-inequality check over all ordered triples."""
    d = m.values
    n = m.size
    max_violation = 0.0
    violations = 0
    off_diagonal = ~np.eye(n, dtype=bool)
    for z in range(n):
        # v[x, y] = d(x, y) - d(x, z) - d(z, y)
        v = d - d[:, z][:, None] - d[z, :][None, :]
        mask = off_diagonal.copy()
        mask[z, :] = False
        mask[:, z] = False
        sample = v[mask]
        if sample.size:
            max_violation = max(max_violation, float(sample.max()))
            violations += int(np.count_nonzero(sample > 0))
    return MetricAuditReport(
        size=n,
        tolerance=tolerance,
        max_symmetry_deviation=m.max_asymmetry(),
        max_triangle_violation=max_violation,
        triangle_violations=violations,
        negative_entries=int(np.count_nonzero(d < 0)),
        entries_above_1_1=int(np.count_nonzero(d > 1.1)),
        max_self_distance=float(np.max(np.diag(d))) if n else 0.0,
    )


def _kmer_indices(doc: Document, lookup: np.ndarray, k: int, base: int) -> np.ndarray:
    digits = lookup[np.frombuffer(doc.content, dtype=np.uint8)]
    bad = np.flatnonzero(digits < 0)
    if bad.size:
        offset = int(bad[0])
        raise InvalidInput(
            f"document {doc.label!r} has byte 0x{doc.content[offset]:02x} outside the alphabet at offset {offset}",
            details={"label": doc.label, "offset": offset},
        )
    if len(digits) < k:
        return np.empty(0, dtype=np.int64)
    weights = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return sliding_window_view(digits, k) @ weights


def _rescale(values: np.ndarray, scaling: ScalingMode) -> np.ndarray:
    if scaling == ScalingMode.NONE or values.shape[0] < 2:
        return values
    off = values[~np.eye(values.shape[0], dtype=bool)]
    high, low = float(off.max()), float(off.min())
    if scaling == ScalingMode.MINMAX and high > low:
        scaled = (values - low) / (high - low)
        np.fill_diagonal(scaled, 0.0)
        return scaled
    # linear, or minmax with every off-diagonal entry equal
    return values / high if high > 0 else values


def block_frequency_vectors(
    docs: Sequence[Document], k: int = 6, alphabet: bytes = b"ACGT"
) -> Union[np.ndarray, sparse.csr_matrix]:
    """Row i counts the overlapping k-blocks of docs[i]; dense up to 2**20 columns, sparse beyond."""
    if k < 1:
        raise InvalidInput(f"block length must be positive, got {k}")
    if not alphabet or len(set(alphabet)) != len(alphabet):
        raise InvalidInput("alphabet must be a nonempty set of distinct bytes")
    base = len(alphabet)
    dimension = base ** k
    if dimension >= 2 ** 62:
        raise InvalidInput(f"{base}^{k} block vectors do not fit in memory")
    lookup = np.full(256, -1, dtype=np.int64)
    lookup[np.frombuffer(alphabet, dtype=np.uint8)] = np.arange(base)
    indices = [_kmer_indices(doc, lookup, k, base) for doc in docs]
    n = len(docs)
    if dimension <= DENSE_DIMENSION_LIMIT:
        return np.stack([np.bincount(idx, minlength=dimension) for idx in indices]).astype(np.float64)
    rows = np.repeat(np.arange(n), [len(idx) for idx in indices])
    cols = np.concatenate(indices)
    return sparse.csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(n, dimension))


def block_frequency_distance(
    docs: Sequence[Document],
    k: int = 6,
    alphabet: bytes = b"ACGT",
    scaling: ScalingMode = ScalingMode.LINEAR,
) -> DistanceMatrix:
    """Euclidean distance between overlapping k-block count vectors."""
    check_documents(docs)
    counts = block_frequency_vectors(docs, k, alphabet)
    n = len(docs)
    if isinstance(counts, np.ndarray):
        values = squareform(pdist(counts, metric="euclidean"))
    else:
        values = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                values[i, j] = values[j, i] = sparse_norm(counts[i] - counts[j])

    return DistanceMatrix(
        [doc.label for doc in docs],
        _rescale(values, scaling),
        {"distance": "block-frequency", "k": k, "alphabet": alphabet.decode("latin-1"), "scaling": scaling.value},
    )


def label_for(path: Union[str, Path]) -> str:
    return "_".join(os.path.basename(os.fspath(path)).split())


def expand_paths(paths: Iterable[Union[str, Path]]) -> List[Path]:
    """Files named directly plus, for each directory, its files in lexicographic order."""
    files: List[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            files.extend(sorted((p for p in path.iterdir() if p.is_file()), key=lambda p: p.name))
        else:
            files.append(path)
    return files


def load_documents(paths: Iterable[Union[str, Path]]) -> List[Document]:
    files = expand_paths(paths)
    docs: List[Document] = []
    seen = set()
    for path in files:
        label = label_for(path)
        if not label:
            raise InvalidInput(f"cannot derive a label from {str(path)!r}")
        if label in seen:
            raise DuplicateLabel(label)
        seen.add(label)
        try:
            content = path.read_bytes()
        except OSError as e:
            raise InputReadError(str(path), e.strerror or str(e))
        docs.append(Document(label=label, content=content))
    return docs
