import logging
import threading
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import redis

from ncdtree.core.config import settings

logger = logging.getLogger(__name__)

CacheKey = Tuple[str, bytes]


class CodeLengthRepository(ABC):
    """Cache of code lengths keyed by (codec identity, SHA-256 digest of the content)."""

    @abstractmethod
    def get(self, key: CacheKey) -> Optional[int]:
        """Return the cached length or None."""

    @abstractmethod
    def add(self, key: CacheKey, length: int) -> int:
        """Insert if absent; return the value now stored."""

    @abstractmethod
    def clear(self) -> None:
        """Drop every cached entry."""


class InMemoryCodeLengthRepository(CodeLengthRepository):
    """Process-local cache shared by all worker threads."""

    def __init__(self):
        self._entries: Dict[CacheKey, int] = {}
        self._lock = threading.Lock()

    def get(self, key: CacheKey) -> Optional[int]:
        with self._lock:
            return self._entries.get(key)

    def add(self, key: CacheKey, length: int) -> int:
        with self._lock:
            return self._entries.setdefault(key, length)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class RedisCodeLengthRepository(CodeLengthRepository):
    """Cache shared between processes and runs through a redis server."""

    def __init__(self, client: "redis.Redis", prefix: str = settings.CACHE_KEY_PREFIX):
        self.client = client
        self.prefix = prefix

    def _redis_key(self, key: CacheKey) -> str:
        codec_key, digest = key
        return f"{self.prefix}:{codec_key}:{digest.hex()}"

    def get(self, key: CacheKey) -> Optional[int]:
        value = self.client.get(self._redis_key(key))
        return int(value) if value is not None else None

    def add(self, key: CacheKey, length: int) -> int:
        redis_key = self._redis_key(key)
        if self.client.set(redis_key, length, nx=True):
            return length
        return int(self.client.get(redis_key))

    def clear(self) -> None:
        for redis_key in self.client.scan_iter(match=f"{self.prefix}:*"):
            self.client.delete(redis_key)


_repository: Optional[CodeLengthRepository] = None
_repository_lock = threading.Lock()


def build_code_length_repository() -> CodeLengthRepository:
    if settings.CACHE_BACKEND == "redis":
        if not settings.REDIS_HOST:
            logger.warning("CACHE_BACKEND=redis but REDIS_HOST is unset; using the in-memory cache")
            return InMemoryCodeLengthRepository()
        client = redis.Redis(
            host=settings.REDIS_HOST,
            port=int(settings.REDIS_PORT),
            db=settings.REDIS_DB,
            password=settings.REDIS_PASSWORD,
        )
        try:
            client.ping()
        except redis.exceptions.RedisError as e:
            logger.warning(f"Redis cache unavailable ({e}); using the in-memory cache")
            return InMemoryCodeLengthRepository()
        logger.info(f"Using redis code-length cache at {settings.REDIS_HOST}:{settings.REDIS_PORT}")
        return RedisCodeLengthRepository(client)
    return InMemoryCodeLengthRepository()


def get_code_length_repository() -> CodeLengthRepository:
    """Session-wide repository, created on first use."""
    global _repository
    with _repository_lock:
        if _repository is None:
            _repository = build_code_length_repository()
        return _repository


def set_code_length_repository(repository: Optional[CodeLengthRepository]) -> None:
    global _repository
    with _repository_lock:
        _repository = repository
