import pytest


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    """Isolated cache directory, also exported through the environment."""
    d = tmp_path / "cache"
    monkeypatch.setenv("CERESA_CACHE_DIR", str(d))
    return d
