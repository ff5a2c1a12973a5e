"""Compression backends behind the Codec kinds.

Builtin backends are stateless and safe to share between threads; zlib and bz2
release the GIL while compressing.
"""
import bz2
import hashlib
import logging
import math
import shutil
import subprocess
import zlib
from abc import ABC, abstractmethod
from typing import Optional

from ncdtree.core.config import settings
from ncdtree.core.exceptions import CodecFailure, CodecUnavailable, InvalidInput
from ncdtree.schemas.codec import Codec, CodecKind

logger = logging.getLogger(__name__)


class CodecBackend(ABC):
    name: str

    @abstractmethod
    def compress(self, data: bytes) -> bytes:
        """Lossless encoding of ``data``."""

    def compressed_size(self, data: bytes) -> int:
        return len(self.compress(data))

    def decompress(self, blob: bytes) -> bytes:
        raise NotImplementedError(f"{self.name} cannot decompress")

    def overhead(self, size: int) -> int:
        """Declared bound on C(x) - |x| for an input of ``size`` bytes."""
        raise NotImplementedError(f"{self.name} declares no overhead bound")


class IdentityBackend(CodecBackend):
    """C(x) = |x|."""

    name = "identity"

    def compress(self, data: bytes) -> bytes:
        return bytes(data)

    def compressed_size(self, data: bytes) -> int:
        return len(data)

    def decompress(self, blob: bytes) -> bytes:
        return bytes(blob)

    def overhead(self, size: int) -> int:
        return 0


class LzBackend(CodecBackend):
    """Deflate stream (LZ77 + Huffman) in the zlib container.

    The LZ77 window is 32 KiB, so repetitions further apart than that are
    invisible to this codec.
    """

    name = "lz"

    def __init__(self, level: Optional[int] = None):
        self.level = settings.LZ_LEVEL if level is None else level

    def compress(self, data: bytes) -> bytes:
        return zlib.compress(data, self.level)

    def decompress(self, blob: bytes) -> bytes:
        return zlib.decompress(blob)

    def overhead(self, size: int) -> int:
        # zlib compressBound
        return (size >> 12) + (size >> 14) + (size >> 25) + 13


class BlockSortBackend(CodecBackend):
    """Burrows-Wheeler block sorting (bzip2: BWT, move-to-front, run-length, Huffman).

    Inputs are limited to one block so that a concatenation xy is transformed
    as a whole.
    """

    name = "blocksort"

    def __init__(self, level: Optional[int] = None, max_input: Optional[int] = None):
        self.level = settings.BLOCKSORT_LEVEL if level is None else level
        self.max_input = settings.BLOCKSORT_MAX_INPUT if max_input is None else max_input

    def compress(self, data: bytes) -> bytes:
        if len(data) > self.max_input:
            raise InvalidInput(
                f"input of {len(data)} bytes exceeds the block-sorting block size of {self.max_input} bytes",
                details={"size": len(data), "limit": self.max_input},
            )
        return bz2.compress(data, self.level)

    def decompress(self, blob: bytes) -> bytes:
        return bz2.decompress(blob)

    def overhead(self, size: int) -> int:
        # bzip2's documented worst case: 1% expansion plus 600 bytes
        return math.ceil(size / 100) + 600


class ExternalCommandBackend(CodecBackend):
    """Any compressor that reads standard input and writes standard output."""

    def __init__(self, codec: Codec, timeout: Optional[float] = None):
        self.name = codec.name
        self.argv = list(codec.command)
        self.timeout = settings.EXTERNAL_TIMEOUT_SECONDS if timeout is None else timeout
        self.executable = shutil.which(self.argv[0])
        if self.executable is None:
            raise CodecUnavailable(self.name, f"command {self.argv[0]!r} not found")

    def compress(self, data: bytes) -> bytes:
        try:
            completed = subprocess.run(
                self.argv, input=data, stdout=subprocess.PIPE, stderr=subprocess.PIPE, timeout=self.timeout
            )
        except (FileNotFoundError, PermissionError) as e:
            raise CodecUnavailable(self.name, str(e))
        except subprocess.TimeoutExpired:
            logger.error(f"External compressor {self.name} timed out after {self.timeout}s")
            raise CodecFailure(self.name, f"timed out after {self.timeout}s")
        if completed.returncode != 0:
            stderr = completed.stderr.decode("utf-8", errors="replace")[-2000:]
            logger.error(f"External compressor {self.name} exited with {completed.returncode}: {stderr.strip()}")
            raise CodecFailure(
                self.name,
                f"exit status {completed.returncode}",
                details={"returncode": completed.returncode, "stderr": stderr},
            )
        return completed.stdout

    def executable_digest(self) -> Optional[str]:
        try:
            with open(self.executable, "rb") as handle:
                return hashlib.sha256(handle.read()).hexdigest()
        except OSError:
            return None


_BUILTINS = {
    CodecKind.IDENTITY: IdentityBackend,
    CodecKind.BUILTIN_LZ: LzBackend,
    CodecKind.BUILTIN_BLOCKSORT: BlockSortBackend,
}


def get_backend(codec: Codec) -> CodecBackend:
    if codec.kind == CodecKind.EXTERNAL:
        return ExternalCommandBackend(codec)
    return _BUILTINS[codec.kind]()
