"""
Shared fixtures: small sample counts and the named example algebras.
"""
import json

import pytest

from tfmonad.config import settings
from tfmonad.services.example_service import example_service


@pytest.fixture(autouse=True)
def small_panels(monkeypatch):
    """Keep every sampled check short."""
    monkeypatch.setattr(settings, "samples", 12)
    monkeypatch.setattr(settings, "max_workers", 1)


@pytest.fixture
def cylinder():
    return example_service.build("cylinder")


@pytest.fixture
def radial():
    return example_service.radial_example()


@pytest.fixture
def rotation():
    return example_service.build("rotation")


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return write
