import pytest

from ektau.core.space import SpaceParams
from ektau.utils import state_manager


@pytest.fixture
def nil():
    return SpaceParams(0.0, 0.5)


@pytest.fixture(params=[(-1.0, 0.0), (0.0, 0.5), (-1.0, 1.0), (1.0, 1.0), (1.0, 0.0)],
                ids=lambda p: f"E({p[0]:g},{p[1]:g})")
def space(request):
    return SpaceParams(*request.param)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Route artifacts into a temporary directory."""
    monkeypatch.setattr(state_manager, "_output_dir", str(tmp_path))
    return tmp_path
