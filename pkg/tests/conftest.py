import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))


@pytest.fixture(autouse=True)
def _serial_workers(monkeypatch: pytest.MonkeyPatch) -> None:
    """Tests run single-threaded unless they ask for workers."""
    monkeypatch.delenv("BARYLAB_THREADS", raising=False)


@pytest.fixture
def threads(monkeypatch: pytest.MonkeyPatch):
    def set_threads(count: int) -> None:
        monkeypatch.setenv("BARYLAB_THREADS", str(count))

    return set_threads
