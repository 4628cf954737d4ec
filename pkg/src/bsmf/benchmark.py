"""Repeated synthetic runs comparing BSMF with the NMF and NMTF baselines."""

import csv
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .belief import star_structure
from .evaluation import assign, evaluate
from .factorization import MULTIPLICATIVE, FitConfig, Mode, fit
from .pipeline import Stages, estimate_endorsements
from .synthetic import generate

MODES = (Mode.BSMF, Mode.NMF, Mode.NMTF)

# Fit settings used for synthetic benchmarks. Multiplicative steps (hence no
# L1 term) because a constant step does not settle on 400x4000 inputs, and an
# RBF width just above the point where ten same-author medoids stop
# saturating every interpolated entry of the default synthetic corpus.
BENCHMARK_CONFIG = FitConfig(eta=MULTIPLICATIVE, lambda1=0.1, lambda2=0.0, eps_rbf=1.42)


@dataclass(frozen=True)
class RoundResult:
    round: int
    seed: int
    model: str
    variant: str
    accuracy: float
    iterations: int
    converged: bool


def run_round(i, spec, cfg, stages=Stages(), modes=MODES, belief=None):
    """One dataset (seed ``spec.seed + i``) factorized by every requested mode."""
    seed = spec.seed + i
    ds = generate(replace(spec, seed=seed))
    x = estimate_endorsements(ds, cfg, stages)
    truth = ds.label_array()
    b = belief if belief is not None else star_structure(spec.k)
    out = []
    for mode in modes:
        mode = Mode(mode)
        res = fit(x, b, replace(cfg, k=spec.k, mode=mode, seed=seed))
        acc = evaluate(assign(res.factors).claim_region, truth, spec.k).accuracy
        out.append(RoundResult(i, seed, mode.value, stages.variant, acc, res.iterations_run, res.converged))
    return out


def _star(args):
    return run_round(*args)


def run_benchmark(rounds, spec, cfg, stages=Stages(), modes=MODES, belief=None, workers=1):
    """Run ``rounds`` rounds; results come back ordered by round then model."""
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    jobs = [(i, spec, cfg, stages, tuple(modes), belief) for i in range(rounds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_star, jobs))
    else:
        chunks = [_star(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def summarize(results, within=None):
    """Mean/stddev accuracy per model (and variant), in first-seen order."""
    groups = {}
    for r in results:
        groups.setdefault((r.model, r.variant), []).append(r)
    rows = []
    for (model, variant), rs in groups.items():
        accs = [r.accuracy for r in rs]
        row = {
            "model": model,
            "variant": variant,
            "rounds": len(rs),
            "mean_accuracy": statistics.fmean(accs),
            "std_accuracy": statistics.pstdev(accs) if len(accs) > 1 else 0.0,
            "min_accuracy": min(accs),
            "max_accuracy": max(accs),
            "converged_fraction": sum(r.converged for r in rs) / len(rs),
            "mean_iterations": statistics.fmean(r.iterations for r in rs),
        }
        if within is not None:
            row[f"converged_within_{within}"] = sum(r.converged and r.iterations <= within for r in rs) / len(rs)
        rows.append(row)
    return rows


def write_results(results, summary, directory):
    directory.mkdir(parents=True, exist_ok=True)
    fields = list(RoundResult.__dataclass_fields__)
    with open(directory / "per_round.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in results:
            w.writerow([getattr(r, f) if f != "accuracy" else repr(r.accuracy) for f in fields])
    with open(directory / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary[0]), lineterminator="\n")
        w.writeheader()
        for row in summary:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
