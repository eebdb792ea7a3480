import numpy as np
import pytest

from tbal.core import Pool, ValidationSet


@pytest.fixture
def tiny_pool():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((40, 3))
    y = (X[:, 0] > 0).astype(np.int64)
    return Pool(X, y, num_classes=2)


@pytest.fixture
def tiny_val():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((30, 3))
    y = (X[:, 0] > 0).astype(np.int64)
    return ValidationSet(X, y)
