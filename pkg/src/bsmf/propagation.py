"""One-hop social smoothing of the interpolated matrix (the S-module).

``a[i, j]`` counts how often source ``i`` retweeted source ``j``.  Row
normalization followed by an equal-weight self loop gives a row-stochastic
operator that keeps half of each source's own signal and spreads the other
half over the sources it retweets.
"""

import numpy as np
import scipy.sparse as sp

from .errors import ShapeError, ValidationError
from .linalg import canonical, row_sums

# Above this many cells the smoothed matrix is kept sparse.
DENSE_LIMIT = 20_000_000


def social_graph(a, symmetrize=False):
    """Canonical retweet-count matrix with self-retweets removed."""
    a = canonical(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"social graph must be square, got {a.shape}")
    if a.nnz and (a.data.min() < 0 or not np.all(np.isfinite(a.data))):
        raise ValidationError("retweet counts must be finite and non-negative")
    a.setdiag(0)
    if symmetrize:
        a = a + a.T
    return canonical(a)


def build_operator(a):
    """Random-walk operator ``½(F⁻¹A + I)``; isolated rows become ``e_i``."""
    a = social_graph(a)
    n = a.shape[0]
    degree = row_sums(a)
    connected = degree > 0
    inv = np.zeros(n)
    inv[connected] = 1.0 / degree[connected]
    walk = sp.diags_array(inv) @ a
    self_weight = np.where(connected, 0.5, 1.0)
    op = 0.5 * walk + sp.diags_array(self_weight)
    return canonical(op)


def convolve(op, xm):
    """``op @ xm``; dense for small outputs, sparse otherwise."""
    if op.shape[1] != xm.shape[0]:
        raise ShapeError(f"operator {op.shape} does not match matrix {xm.shape}")
    # one product path for both layouts so they agree bit for bit
    out = canonical(sp.csr_array(op) @ sp.csr_array(xm))
    if out.shape[0] * out.shape[1] <= DENSE_LIMIT:
        return out.toarray()
    return out
