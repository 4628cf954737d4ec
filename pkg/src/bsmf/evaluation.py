"""Belief assignment from factors and clustering metrics."""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ValidationError


@dataclass(frozen=True)
class Assignment:
    claim_region: np.ndarray
    source_region: np.ndarray
    claim_score: np.ndarray


def assign(f):
    """Argmax of each row of ``M`` and ``U``; ties go to the lowest index."""
    # np.argmax returns the first maximal index, which is the tie-break we want
    m = np.asarray(f.m)
    u = np.asarray(f.u)
    return Assignment(m.argmax(axis=1), u.argmax(axis=1), m.max(axis=1))


def confusion(pred, truth, k):
    """``c[t, p]`` counts items of true region ``t`` predicted as ``p``."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise ValidationError("pred and truth differ in length")
    if pred.size and (min(pred.min(), truth.min()) < 0 or max(pred.max(), truth.max()) >= k):
        raise ValidationError(f"labels must lie in [0, {k})")
    c = np.zeros((k, k), dtype=np.int64)
    np.add.at(c, (truth, pred), 1)
    return c


def align(pred, truth, k, pin_overlap=False):
    """Relabeling of predicted regions that maximizes accuracy.

    Returns ``perm`` with ``perm[p]`` the true region matched to predicted
    region ``p``.  With ``pin_overlap`` region 0 is kept fixed, since a star
    mixture already tells the overlap column apart.
    """
    c = confusion(pred, truth, k)
    if pin_overlap:
        rows, cols = linear_sum_assignment(-c[1:, 1:])
        perm = np.zeros(k, dtype=np.int64)
        perm[cols + 1] = rows + 1
        return perm
    rows, cols = linear_sum_assignment(-c)
    perm = np.empty(k, dtype=np.int64)
    perm[cols] = rows
    return perm


def relabel(pred, perm):
    return np.asarray(perm)[np.asarray(pred, dtype=np.int64)]


def accuracy(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    return float(np.mean(pred == truth)) if truth.size else 0.0


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: list
    recall: list
    f1: list
    support: list
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    permutation: list = None

    def to_json(self):
        return asdict(self)


def _ratio(num, den):
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def score(pred, truth, k, permutation=None):
    """Per-class, macro and support-weighted precision/recall/F1.

    Empty denominators count as 0.  Weighted averages use the true-class
    supports, so the weighted F1 need not lie between weighted precision and
    weighted recall.
    """
    c = confusion(pred, truth, k)
    tp = np.diag(c).astype(np.float64)
    support = c.sum(axis=1).astype(np.float64)
    predicted = c.sum(axis=0).astype(np.float64)
    precision = _ratio(tp, predicted)
    recall = _ratio(tp, support)
    f1 = _ratio(2 * precision * recall, precision + recall)
    total = support.sum()
    weights = support / total if total else np.zeros(k)
    return MetricsReport(
        accuracy=float(tp.sum() / total) if total else 0.0,
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=support.astype(int).tolist(),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        weighted_precision=float(weights @ precision),
        weighted_recall=float(weights @ recall),
        weighted_f1=float(weights @ f1),
        permutation=None if permutation is None else [int(p) for p in permutation],
    )


def evaluate(pred, truth, k, pin_overlap=False):
    """Align predicted regions to the truth, then score."""
    perm = align(pred, truth, k, pin_overlap=pin_overlap)
    return score(relabel(pred, perm), truth, k, permutation=perm)


def top_k_claims(f, region, k, claim_ids=None):
    """Up to ``k`` claims assigned to ``region``, strongest first.

    Ties keep claim order (claim id order when ``claim_ids`` is given).
    """
    m = np.asarray(f.m)
    if not 0 <= region < m.shape[1]:
        raise ValidationError(f"region {region} out of range for K={m.shape[1]}")
    members = np.flatnonzero(m.argmax(axis=1) == region)
    ids = list(range(m.shape[0])) if claim_ids is None else list(claim_ids)
    members = sorted(members, key=lambda j: (-m[j, region], ids[j]))
    return [ids[j] for j in members[:k]]
