import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def brute_matmul(a, b):
    """Triple-loop product on plain lists; independent of numpy's matmul."""
    a = np.asarray(a, dtype=float).tolist()
    b = np.asarray(b, dtype=float).tolist()
    n, k, m = len(a), len(b), len(b[0])
    return np.array([[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)])
