import hashlib
import itertools
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

from ncdtree.core.config import settings
from ncdtree.core.exceptions import InvalidInput
from ncdtree.repositories.code_length_repository import CodeLengthRepository, get_code_length_repository
from ncdtree.schemas.codec import AXIOMS, AxiomRecord, Codec, CodecKind, CodeLength, NormalityReport
from ncdtree.schemas.manifest import CodecIdentity
from ncdtree.services.codec_backends import CodecBackend, ExternalCommandBackend, get_backend

logger = logging.getLogger(__name__)


def slack(n: int, alpha: float, beta: float) -> float:
    """Allowed axiom violation in bytes for inputs of at most ``n`` bytes."""
    return alpha * math.log2(max(n, 1)) + beta


class _AxiomTally:
    def __init__(self, alpha: float, beta: float):
        self.alpha = alpha
        self.beta = beta
        self.record = AxiomRecord()

    def add(self, violation: float, longest: int, reference_length: int) -> None:
        allowed = slack(longest, self.alpha, self.beta)
        violation = max(0.0, float(violation))
        record = self.record
        record.samples += 1
        if violation > allowed:
            record.passed = False
        if violation > record.max_violation or record.samples == 1:
            record.max_violation = violation
            record.worst_slack = allowed
        if reference_length > 0:
            record.max_relative_violation = max(record.max_relative_violation, violation / reference_length)


class CompressorService:
    """Cached code lengths and the normal-compressor audit."""

    def __init__(self, repository: Optional[CodeLengthRepository] = None):
        self.repository = repository or get_code_length_repository()
        self._backends: Dict[str, CodecBackend] = {}
        self._lock = threading.Lock()

    def backend(self, codec: Codec) -> CodecBackend:
        with self._lock:
            backend = self._backends.get(codec.identity_key)
            if backend is None:
                backend = get_backend(codec)
                self._backends[codec.identity_key] = backend
            return backend

    def code_length(self, codec: Codec, data: bytes) -> CodeLength:
        key = (codec.identity_key, hashlib.sha256(data).digest())
        cached = self.repository.get(key)
        if cached is not None:
            return cached
        logger.debug(f"Code-length cache miss for {codec.name} on {len(data)} bytes")
        length = self.backend(codec).compressed_size(data)
        return self.repository.add(key, length)

    def concat_code_length(self, codec: Codec, x: bytes, y: bytes) -> CodeLength:
        return self.code_length(codec, x + y)

    def code_lengths(self, codec: Codec, items: Sequence[bytes], workers: int = 1) -> List[CodeLength]:
        """Code lengths of ``items`` in order, computed on up to ``workers`` threads."""
        if workers <= 1 or len(items) < 2:
            return [self.code_length(codec, item) for item in items]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda item: self.code_length(codec, item), items))

    def self_test(self, codec: Codec, data: bytes) -> Optional[bool]:
        """Round-trip check for builtin codecs; None for external commands."""
        if codec.kind == CodecKind.EXTERNAL:
            return None
        backend = self.backend(codec)
        ok = backend.decompress(backend.compress(data)) == data
        if not ok:
            logger.error(f"Compressor {codec.name} failed to round-trip {len(data)} bytes")
        return ok

    def audit_normality(
        self,
        codec: Codec,
        corpus: Sequence[bytes],
        alpha: Optional[float] = None,
        beta: Optional[float] = None,
        workers: int = 1,
    ) -> NormalityReport:
        if len(corpus) < 3:
            raise InvalidInput(
                f"the normality audit needs at least 3 corpus items, got {len(corpus)}",
                details={"corpus_size": len(corpus)},
            )
        alpha = settings.NORMALITY_SLACK_ALPHA if alpha is None else alpha
        beta = settings.NORMALITY_SLACK_BETA if beta is None else beta
        n = len(corpus)
        logger.info(f"Auditing compressor {codec.name} on {n} items")

        ordered_pairs = list(itertools.permutations(range(n), 2))
        single = self.code_lengths(codec, corpus, workers)
        doubled = self.code_lengths(codec, [x + x for x in corpus], workers)
        joined_values = self.code_lengths(codec, [corpus[i] + corpus[j] for i, j in ordered_pairs], workers)
        joined = dict(zip(ordered_pairs, joined_values))
        sizes = [len(x) for x in corpus]

        tallies = {name: _AxiomTally(alpha, beta) for name in AXIOMS}
        # C(empty) = 0
        tallies["idempotency"].add(self.code_length(codec, b""), 0, 0)
        for i in range(n):
            tallies["idempotency"].add(doubled[i] - single[i], sizes[i], single[i])
        for i, j in ordered_pairs:
            longest = max(sizes[i], sizes[j])
            reference = single[i] if sizes[i] >= sizes[j] else single[j]
            tallies["monotonicity"].add(single[i] - joined[i, j], longest, reference)
            tallies["subadditivity"].add(joined[i, j] - single[i] - single[j], longest, reference)
            if i < j:
                tallies["symmetry"].add(abs(joined[i, j] - joined[j, i]), longest, reference)
        for i, j, k in itertools.permutations(range(n), 3):
            largest = max((i, j, k), key=lambda idx: sizes[idx])
            tallies["distributivity"].add(
                joined[i, j] + single[k] - joined[i, k] - joined[j, k], sizes[largest], single[largest]
            )

        round_trip = None
        if codec.kind != CodecKind.EXTERNAL:
            round_trip = all(self.self_test(codec, x) for x in [b"", *corpus])

        report = NormalityReport(
            codec=codec.name,
            alpha=alpha,
            beta=beta,
            corpus_size=n,
            axioms={name: tally.record for name, tally in tallies.items()},
            round_trip=round_trip,
        )
        if report.passed:
            logger.info(f"Compressor {codec.name} passed the normality audit")
        else:
            logger.warning(f"Compressor {codec.name} failed axioms: {', '.join(report.failed_axioms()) or 'round-trip'}")
        return report

    def describe_codec(self, codec: Codec) -> CodecIdentity:
        digest = None
        if codec.kind == CodecKind.EXTERNAL:
            backend = self.backend(codec)
            if isinstance(backend, ExternalCommandBackend):
                digest = backend.executable_digest()
        return CodecIdentity(
            name=codec.name,
            kind=codec.kind.value,
            command=list(codec.command) if codec.command else None,
            executable_digest=digest,
        )


def code_length(codec: Codec, data: bytes) -> CodeLength:
    return CompressorService().code_length(codec, data)


def concat_code_length(codec: Codec, x: bytes, y: bytes) -> CodeLength:
    return CompressorService().concat_code_length(codec, x, y)


def self_test(codec: Codec, data: bytes) -> Optional[bool]:
    return CompressorService().self_test(codec, data)


def audit_normality(
    codec: Codec,
    corpus: Sequence[bytes],
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    workers: int = 1,
) -> NormalityReport:
    return CompressorService().audit_normality(codec, corpus, alpha, beta, workers)
