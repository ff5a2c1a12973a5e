"""Bundled corpora and fixture files."""
from importlib import resources
from typing import Any

import yaml


def data_file(*parts: str):
    """Traversable for a file under ncdtree/data."""
    return resources.files(__name__).joinpath(*parts)


def load_yaml(name: str) -> Any:
    with data_file(name).open("r", encoding="utf-8") as handle:
        return yaml.safe_load(handle)
