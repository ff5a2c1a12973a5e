import pytest
from hypothesis import HealthCheck, settings as hypothesis_settings

from ncdtree.core.rng import make_rng
from ncdtree.data import data_file
from ncdtree.repositories.code_length_repository import InMemoryCodeLengthRepository, set_code_length_repository
from ncdtree.schemas.codec import Codec
from ncdtree.schemas.document import Document
from ncdtree.services.compressor_service import CompressorService


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance check (deselect with -m 'not slow')")


@pytest.fixture(autouse=True)
def code_length_repository():
    """Give every test its own in-memory code-length cache."""
    repository = InMemoryCodeLengthRepository()
    set_code_length_repository(repository)
    yield repository
    set_code_length_repository(None)


@pytest.fixture
def compressor_service(code_length_repository):
    return CompressorService(code_length_repository)


@pytest.fixture
def identity():
    return Codec.builtin("identity")


@pytest.fixture
def lz():
    return Codec.builtin("lz")


@pytest.fixture
def blocksort():
    return Codec.builtin("blocksort")


@pytest.fixture
def rng():
    return make_rng(20240601)


@pytest.fixture(scope="session")
def text_corpus():
    """The bundled license texts, in lexicographic order."""
    directory = data_file("corpus", "text")
    return [entry.read_bytes() for entry in sorted(directory.iterdir(), key=lambda e: e.name)]


@pytest.fixture
def sample_text(text_corpus):
    return text_corpus[0]


@pytest.fixture
def make_docs():
    """Build Documents from label -> bytes pairs."""
    def _make(**contents):
        return [Document(label=label, content=content) for label, content in contents.items()]
    return _make


hypothesis_settings.register_profile(
    "ncdtree", deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
hypothesis_settings.load_profile("ncdtree")
