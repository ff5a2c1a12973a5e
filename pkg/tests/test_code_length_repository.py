import threading

import pytest
import redis

from ncdtree.core.config import settings
from ncdtree.repositories import code_length_repository as repo_module
from ncdtree.repositories.code_length_repository import (
    InMemoryCodeLengthRepository,
    RedisCodeLengthRepository,
    build_code_length_repository,
)

KEY = ("builtin-lz:lz", bytes(range(32)))


def test_in_memory_add_keeps_first_value():
    """Test insert-if-absent semantics of the in-memory cache."""
    repository = InMemoryCodeLengthRepository()

    assert repository.get(KEY) is None
    assert repository.add(KEY, 17) == 17
    assert repository.add(KEY, 99) == 17
    assert repository.get(KEY) == 17
    assert len(repository) == 1

    repository.clear()
    assert repository.get(KEY) is None


def test_in_memory_concurrent_adds_agree():
    """Test that racing writers all observe the same stored value."""
    repository = InMemoryCodeLengthRepository()
    seen = []

    def writer(value):
        seen.append(repository.add(KEY, value))

    threads = [threading.Thread(target=writer, args=(value,)) for value in range(16)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert len(set(seen)) == 1
    assert repository.get(KEY) == seen[0]


def test_redis_add_uses_set_nx(mocker):
    """Test the redis backend stores with SET NX and returns the winner's value."""
    client = mocker.MagicMock()
    client.set.return_value = True
    repository = RedisCodeLengthRepository(client, prefix="test")

    assert repository.add(KEY, 42) == 42
    redis_key = f"test:{KEY[0]}:{KEY[1].hex()}"
    client.set.assert_called_once_with(redis_key, 42, nx=True)

    # Another process got there first
    client.set.return_value = None
    client.get.return_value = b"40"
    assert repository.add(KEY, 42) == 40


def test_redis_get_and_clear(mocker):
    """Test reads decode integers and clear deletes only prefixed keys."""
    client = mocker.MagicMock()
    client.get.return_value = None
    repository = RedisCodeLengthRepository(client, prefix="test")
    assert repository.get(KEY) is None

    client.get.return_value = b"12"
    assert repository.get(KEY) == 12

    client.scan_iter.return_value = [b"test:a", b"test:b"]
    repository.clear()
    client.scan_iter.assert_called_once_with(match="test:*")
    assert client.delete.call_count == 2


def test_build_repository_defaults_to_memory(monkeypatch):
    monkeypatch.setattr(settings, "CACHE_BACKEND", "memory")
    assert isinstance(build_code_length_repository(), InMemoryCodeLengthRepository)


def test_build_repository_falls_back_when_redis_unreachable(monkeypatch, mocker):
    """Test the redis backend degrades to memory when the server does not answer."""
    monkeypatch.setattr(settings, "CACHE_BACKEND", "redis")
    monkeypatch.setattr(settings, "REDIS_HOST", "cache.invalid")
    client = mocker.MagicMock()
    client.ping.side_effect = redis.exceptions.ConnectionError("refused")
    mocker.patch.object(repo_module.redis, "Redis", return_value=client)

    assert isinstance(build_code_length_repository(), InMemoryCodeLengthRepository)


def test_build_repository_uses_redis_when_reachable(monkeypatch, mocker):
    monkeypatch.setattr(settings, "CACHE_BACKEND", "redis")
    monkeypatch.setattr(settings, "REDIS_HOST", "localhost")
    client = mocker.MagicMock()
    mocker.patch.object(repo_module.redis, "Redis", return_value=client)

    repository = build_code_length_repository()

    assert isinstance(repository, RedisCodeLengthRepository)
    assert repository.client is client


@pytest.mark.parametrize("backend", ["memory", "MEMORY", "redis"])
def test_settings_normalise_cache_backend(backend):
    assert settings.__class__(CACHE_BACKEND=backend).CACHE_BACKEND == backend.lower()


def test_settings_reject_unknown_cache_backend():
    with pytest.raises(ValueError):
        settings.__class__(CACHE_BACKEND="memcached")
