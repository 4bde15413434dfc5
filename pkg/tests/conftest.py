import pytest

from src.boost import make_boost

SPEEDS = [0.25, 0.5, 0.75]


@pytest.fixture(params=SPEEDS, ids=lambda v: f"v={v}")
def boost(request):
    return make_boost(request.param)


@pytest.fixture
def half():
    return make_boost(0.5)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside an empty directory so runs/ and output/ are local to the test"""
    monkeypatch.chdir(tmp_path)
    return tmp_path
