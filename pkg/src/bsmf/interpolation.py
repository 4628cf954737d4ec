"""Similarity interpolation of the source-claim matrix (the M-module).

A source that endorsed claim ``k`` probably also endorses claims whose
bag-of-words vectors lie close to ``k``.  Each source's endorsed claims act
as medoids; every other claim receives the summed Gaussian RBF similarity to
those medoids, clamped to 1 and zeroed below a cutoff.
"""

import re
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError, ShapeError, ValidationError
from .linalg import canonical

_TOKEN = re.compile(r"[#@]?\w+")

_R2_ROUNDING = 1e-12

# Number of medoid rows whose kernel block is evaluated at once.
_BLOCK_ROWS = 2048


def tokenize(text):
    """Lowercase word tokens; ``#`` and ``@`` prefixes stay attached.

    >>> tokenize("Jamala WON!")
    ['jamala', 'won']
    """
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class RbfParams:
    epsilon: float = 1.0
    cutoff: float = 0.2

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError("RBF epsilon must be positive")
        if not 0 <= self.cutoff < 1:
            raise ValidationError("cutoff must lie in [0, 1)")


@dataclass(frozen=True)
class BowVectors:
    """Unit-normalized bag-of-words rows, one per claim."""

    vectors: sp.csr_array
    vocabulary: dict

    def __len__(self):
        return self.vectors.shape[0]

    def __getitem__(self, j):
        return self.vectors[[j], :]


def bag_of_words(token_lists, vocabulary=None):
    """Count tokens per claim and L2-normalize each row.

    The vocabulary is built from the whole corpus unless one is given, in
    which case unknown tokens are ignored.

    Raises
    ------
    InputError
        If a claim has no (known) tokens; it could not serve as a medoid.
    """
    build = vocabulary is None
    vocab = {} if build else dict(vocabulary)
    indptr = [0]
    indices = []
    data = []
    for j, tokens in enumerate(token_lists):
        counts = {}
        for tok in tokens:
            col = vocab.get(tok)
            if col is None:
                if not build:
                    continue
                col = vocab[tok] = len(vocab)
            counts[col] = counts.get(col, 0) + 1
        if not counts:
            raise InputError(f"claim {j} has no tokens")
        cols = sorted(counts)
        vals = np.array([counts[c] for c in cols], dtype=np.float64)
        indices.extend(cols)
        data.extend(vals / np.sqrt(np.dot(vals, vals)))
        indptr.append(len(indices))
    vectors = sp.csr_array(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(indptr) - 1, len(vocab)),
    )
    return BowVectors(vectors, vocab)


def rbf_similarity(wa, wb, params=RbfParams()):
    """``exp(-(epsilon * ||wa - wb||)**2)`` for two normalized BOW vectors."""
    wa = wa.toarray().ravel() if sp.issparse(wa) else np.asarray(wa, dtype=np.float64).ravel()
    wb = wb.toarray().ravel() if sp.issparse(wb) else np.asarray(wb, dtype=np.float64).ravel()
    diff = wa - wb
    return float(np.exp(-(params.epsilon**2) * np.dot(diff, diff)))


def rbf_kernel(medoids, claims, params=RbfParams()):
    """Dense RBF similarities between rows of ``medoids`` and rows of ``claims``.

    Both inputs must be unit-normalized, so ``r**2 = 2 - 2 cos``.
    """
    cos = medoids @ claims.T
    cos = cos.toarray() if sp.issparse(cos) else np.asarray(cos)
    r2 = 2.0 - 2.0 * cos
    # cos of identical unit vectors carries a few ulps of rounding error
    r2[r2 < _R2_ROUNDING] = 0.0
    return np.exp(-(params.epsilon**2) * r2)


def interpolate(x, bows, params=RbfParams()):
    """Estimate unobserved endorsements from claim similarity.

    Parameters
    ----------
    x : sparse (n_sources, n_claims)
        Binary source-claim matrix.
    bows : BowVectors
        One normalized vector per claim column.
    params : RbfParams

    Returns
    -------
    csr_array
        ``X^M`` with observed entries exactly 1, interpolated entries in
        ``[cutoff, 1]`` and everything else dropped.
    """
    x = canonical(x)
    n_sources, n_claims = x.shape
    if len(bows) != n_claims:
        raise ShapeError(f"{len(bows)} BOW vectors for {n_claims} claim columns")
    if x.nnz and not np.all(x.data == 1.0):
        raise ValidationError("source-claim matrix must be binary")
    w = bows.vectors

    out_rows, out_cols, out_vals = [], [], []
    start = 0
    while start < n_sources:
        # group whole source rows so that a block holds about _BLOCK_ROWS medoids
        stop = start + 1
        while stop < n_sources and x.indptr[stop + 1] - x.indptr[start] <= _BLOCK_ROWS:
            stop += 1
        lo, hi = x.indptr[start], x.indptr[stop]
        if hi > lo:
            kernel = rbf_kernel(w[x.indices[lo:hi]], w, params)
            offsets = x.indptr[start:stop] - lo
            counts = np.diff(x.indptr[start : stop + 1])
            nonempty = counts > 0
            sums = np.zeros((stop - start, n_claims))
            sums[nonempty] = np.add.reduceat(kernel, offsets[nonempty], axis=0)
            np.minimum(sums, 1.0, out=sums)
            sums[sums < params.cutoff] = 0.0
            for r in range(stop - start):
                i = start + r
                obs = x.indices[x.indptr[i] : x.indptr[i + 1]]
                sums[r, obs] = 1.0
                nz = np.flatnonzero(sums[r])
                out_rows.append(np.full(nz.size, i, dtype=np.int64))
                out_cols.append(nz)
                out_vals.append(sums[r, nz])
        start = stop

    if out_rows:
        rows = np.concatenate(out_rows)
        cols = np.concatenate(out_cols)
        vals = np.concatenate(out_vals)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    return canonical(sp.coo_array((vals, (rows, cols)), shape=(n_sources, n_claims)))
