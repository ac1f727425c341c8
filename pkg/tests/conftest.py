import pytest

from src.config import EXPORT_CONFIG
from src.documents import load_document, module_from_document


@pytest.fixture
def fixture_path():
    """Path of a bundled example document"""
    return lambda name: str(EXPORT_CONFIG['fixture_dir'] / name)


@pytest.fixture
def load_fixture(fixture_path):
    """Kisin module of a bundled example document"""
    def load(name):
        return module_from_document(load_document(fixture_path(name)))
    return load
