from pathlib import Path

import pytest

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keeps a user's ~/.config/egglam/config.json out of every test."""
    path = tmp_path / "config.json"
    monkeypatch.setattr("src.config.manager.CONFIG_FILE", path)
    return path


@pytest.fixture
def corpus():
    return lambda name: CORPUS_DIR / f"{name}.problem"