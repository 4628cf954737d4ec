"""Belief mixture matrices.

Entry ``b[p, q] == 1`` means sources holding belief ``p`` endorse claims that
espouse belief ``q``.  By convention index 0 of a star structure is the
overlap region that every group endorses.
"""

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError


class BeliefMixture:
    """Validated, immutable K x K binary mixture matrix."""

    def __init__(self, b, names=None):
        arr = np.array(b, dtype=np.float64)
        _validate(arr)
        arr.setflags(write=False)
        self._b = arr
        if names is not None:
            names = tuple(str(n) for n in names)
            if len(names) != arr.shape[0]:
                raise ValidationError(f"expected {arr.shape[0]} region names, got {len(names)}")
        self.names = names

    @property
    def b(self):
        return self._b

    @property
    def k(self):
        return self._b.shape[0]

    def rows(self):
        return [[int(v) for v in row] for row in self._b]

    def is_identity(self):
        return bool(np.array_equal(self._b, np.eye(self.k)))

    def __eq__(self, other):
        if not isinstance(other, BeliefMixture):
            return NotImplemented
        return np.array_equal(self._b, other._b) and self.names == other.names

    def __hash__(self):
        return hash((self._b.tobytes(), self.names))

    def __repr__(self):
        return f"BeliefMixture({self.rows()!r})"

    def to_json(self):
        doc = {"k": self.k, "rows": self.rows()}
        if self.names is not None:
            doc["names"] = list(self.names)
        return doc

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        rows = doc.get("rows")
        if rows is None:
            raise ValidationError("belief structure JSON needs a 'rows' field")
        mix = from_rows(rows, names=doc.get("names"))
        if "k" in doc and int(doc["k"]) != mix.k:
            raise ValidationError(f"'k' is {doc['k']} but rows describe {mix.k} regions")
        return mix


def _validate(arr):
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"belief mixture must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError("belief mixture entries must be 0 or 1")
    if np.any(arr.sum(axis=1) == 0):
        raise ValidationError("belief mixture has an all-zero row")
    if np.any(arr.sum(axis=0) == 0):
        raise ValidationError("belief mixture has an all-zero column")
    if not np.all(np.diag(arr) == 1):
        raise ValidationError("belief mixture diagonal must be all ones")


def star_structure(k, names=None):
    """Overlap column 0 endorsed by everyone plus an identity block.

    >>> star_structure(3).rows()
    [[1, 0, 0], [1, 1, 0], [1, 0, 1]]
    """
    if k < 2:
        raise ValidationError("star structure needs k >= 2")
    b = np.eye(k)
    b[:, 0] = 1.0
    return BeliefMixture(b, names)


def identity(k, names=None):
    if k < 1:
        raise ValidationError("identity structure needs k >= 1")
    return BeliefMixture(np.eye(k), names)


def from_rows(rows, names=None):
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"belief mixture rows are not a square numeric matrix: {exc}") from None
    return BeliefMixture(arr, names)


def parse_belief(text):
    """Parse a ``star:K``, ``identity:K`` or ``file:PATH`` belief spec."""
    kind, sep, arg = text.partition(":")
    if not sep:
        raise ValidationError(f"belief spec {text!r} is not of the form kind:arg")
    if kind == "file":
        return BeliefMixture.from_json(Path(arg).read_text())
    try:
        k = int(arg)
    except ValueError:
        raise ValidationError(f"belief spec {text!r} needs an integer K") from None
    if kind == "star":
        return star_structure(k)
    if kind == "identity":
        return identity(k)
    raise ValidationError(f"unknown belief structure kind {kind!r}")
