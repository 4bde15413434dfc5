import numpy as np

from src.helpers import as_output, thread_count


def test_thread_count_from_environment(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("BOOSTDIFF_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("BOOSTDIFF_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("BOOSTDIFF_THREADS", "many")
    assert thread_count() >= 1


def test_as_output_keeps_scalars_scalar():
    assert isinstance(as_output(np.array(2.0), 1.0), float)
    assert as_output(np.array([2.0]), np.array([1.0])).shape == (1,)
