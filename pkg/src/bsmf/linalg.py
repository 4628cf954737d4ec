"""Sparse/dense kernel for the preprocessing stages and the solver.

Sparse matrices are ``scipy.sparse.csr_array`` in canonical form (sorted
column indices, no duplicates, no explicit zeros); dense matrices are
float64 ``numpy`` arrays.
"""

import numpy as np
import scipy.sparse as sp

from .errors import ShapeError, ValidationError


def sparse_matrix(n_rows, n_cols, entries=()):
    """Build a canonical non-negative sparse matrix from ``(row, col, value)`` triples.

    Raises
    ------
    ValidationError
        On negative or non-finite values, out-of-range indices or a repeated
        ``(row, col)`` pair.
    """
    entries = list(entries)
    if entries:
        rows, cols, vals = (np.asarray(c) for c in zip(*entries))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    rows = rows.astype(np.int64)
    cols = cols.astype(np.int64)
    vals = vals.astype(np.float64)
    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols:
            raise ValidationError("entry index out of bounds")
        if not np.all(np.isfinite(vals)) or vals.min() < 0:
            raise ValidationError("entries must be finite and non-negative")
        keys = rows * n_cols + cols
        if np.unique(keys).size != keys.size:
            raise ValidationError("duplicate (row, col) entry")
    a = sp.coo_array((vals, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    return canonical(a)


def canonical(a):
    """Return ``a`` as a canonical CSR array (sorted, summed, zeros dropped)."""
    a = sp.csr_array(a, dtype=np.float64, copy=True)
    a.sum_duplicates()
    a.eliminate_zeros()
    a.sort_indices()
    return a


def entries(a):
    """Yield ``(row, col, value)`` in row-major, column-ascending order."""
    a = canonical(a)
    for i in range(a.shape[0]):
        lo, hi = a.indptr[i], a.indptr[i + 1]
        for j, v in zip(a.indices[lo:hi], a.data[lo:hi]):
            yield i, int(j), float(v)


def spmm(a, b):
    """Sparse (or dense) times dense product, returned as a dense array."""
    b = np.asarray(b, dtype=np.float64)
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return np.asarray(a @ b, dtype=np.float64)


def frobenius_sq(a):
    """Sum of squared entries."""
    if sp.issparse(a):
        return float(np.dot(a.data, a.data))
    a = np.asarray(a, dtype=np.float64)
    return float(np.dot(a.ravel(), a.ravel()))


def l1_norm(a):
    """Sum of absolute entries."""
    if sp.issparse(a):
        return float(np.abs(a.data).sum())
    return float(np.abs(np.asarray(a, dtype=np.float64)).sum())


def row_sums(a):
    return np.asarray(a.sum(axis=1), dtype=np.float64).ravel()


def clip_floor(a, floor):
    """Raise every entry below ``floor`` to ``floor``.

    Used after each gradient step so that the factors stay strictly positive
    (the multiplicative step sizes divide by them).
    """
    if not floor > 0:
        raise ValidationError("floor must be positive")
    return np.maximum(np.asarray(a, dtype=np.float64), floor)


def to_dense(a):
    if sp.issparse(a):
        return a.toarray()
    return np.asarray(a, dtype=np.float64)
