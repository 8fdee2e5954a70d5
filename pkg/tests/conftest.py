import numpy as np
import pytest

from scout.data import synthetic_text


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """~200 KB deterministic corpus for fast training tests."""
    path = tmp_path_factory.mktemp("corpus") / "small.txt"
    path.write_text(synthetic_text(200_000, seed=11), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory):
    """~1 MB corpus for the training smoke acceptance run."""
    path = tmp_path_factory.mktemp("corpus") / "smoke.txt"
    path.write_text(synthetic_text(1_000_000, seed=11), encoding="utf-8")
    return path


@pytest.fixture()
def stream():
    return np.random.default_rng(1234)
