"""End-to-end run: interpolate, smooth, factorize, assign, score."""

from dataclasses import dataclass

import numpy as np

from .belief import identity
from .evaluation import assign, evaluate
from .factorization import Mode, fit
from .interpolation import RbfParams, bag_of_words, interpolate
from .linalg import to_dense
from .propagation import build_operator, convolve, social_graph


@dataclass(frozen=True)
class Stages:
    """Which preprocessing stages run before the factorization."""

    use_m: bool = True
    use_s: bool = True
    symmetrize_graph: bool = False

    @property
    def variant(self):
        if self.use_m and self.use_s:
            return "full"
        if self.use_s:
            return "no-m"
        if self.use_m:
            return "no-s"
        return "no-m-no-s"


@dataclass(frozen=True)
class PipelineResult:
    fit: object
    assignment: object
    metrics: object  # MetricsReport, or None without labels
    stages: Stages


def estimate_endorsements(ds, cfg, stages=Stages()):
    """Build the matrix handed to the solver (``X``, ``X^M`` or ``X^MS``)."""
    x = ds.source_claim_matrix()
    if stages.use_m:
        bows = bag_of_words(ds.token_lists())
        x = interpolate(x, bows, RbfParams(cfg.eps_rbf, cfg.cutoff))
    if stages.use_s:
        a = social_graph(ds.social_matrix(), symmetrize=stages.symmetrize_graph)
        return convolve(build_operator(a), x)
    return to_dense(x) if x.shape[0] * x.shape[1] <= 20_000_000 else x


def run(ds, belief, cfg, stages=Stages(), pin_overlap=False):
    x = estimate_endorsements(ds, cfg, stages)
    if cfg.mode is Mode.NMF and belief is None:
        belief = identity(cfg.k)
    result = fit(x, belief, cfg)
    a = assign(result.factors)
    truth = ds.label_array()
    metrics = None
    if truth is not None:
        known = truth >= 0
        if np.any(truth[known] >= cfg.k):
            metrics = None
        else:
            metrics = evaluate(a.claim_region[known], truth[known], cfg.k, pin_overlap=pin_overlap)
    return PipelineResult(result, a, metrics, stages)
