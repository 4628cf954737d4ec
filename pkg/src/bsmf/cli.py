"""Command line interface.

Stages stream JSON documents when no output directory is given, so they can
be piped::

    bsmf synth --seed 7 | bsmf fit --belief star:4 | bsmf eval

Exit codes: 0 success, 2 input error, 3 optimizer divergence.
"""

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import benchmark as bench
from .belief import identity, parse_belief
from .dataset import from_bundle, ingest, read_dataset, to_bundle, write_dataset
from .errors import BsmfError, InputError, OptimizerError
from .evaluation import assign, evaluate, top_k_claims
from .factorization import MULTIPLICATIVE, FactorPair, FitConfig, Mode, fit
from .pipeline import Stages, estimate_endorsements
from .synthetic import SynthSpec, generate

EXIT_INPUT = 2
EXIT_DIVERGED = 3


def _eta(text):
    if text == MULTIPLICATIVE:
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a float or {MULTIPLICATIVE!r}") from None


def _dump(doc, path=None):
    text = json.dumps(doc, indent=None if path is None else 2, sort_keys=True)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _load_json(source):
    try:
        if source in (None, "-"):
            return json.load(sys.stdin)
        return json.loads(Path(source).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"could not parse JSON input: {exc}", source) from None


def _load_dataset(source):
    if source not in (None, "-") and Path(source).is_dir():
        return read_dataset(source)
    return from_bundle(_load_json(source))


def _load_fit(source):
    if source not in (None, "-") and Path(source).is_dir():
        source = Path(source) / "fit.json"
    doc = _load_json(source)
    if doc.get("kind") != "fit":
        raise InputError(f"expected a fit document, got kind {doc.get('kind')!r}")
    return doc


def digest(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


# -- synth -----------------------------------------------------------------


def _add_synth_args(p):
    d = SynthSpec()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--k", type=int, default=d.k)
    p.add_argument("--users-per-group", type=int, default=d.users_per_group)
    p.add_argument("--messages-per-user", type=int, default=d.messages_per_user)
    p.add_argument("--vocab-per-corpus", type=int, default=d.vocab_per_corpus)
    p.add_argument("--min-length", type=int, default=d.message_length[0])
    p.add_argument("--max-length", type=int, default=d.message_length[1])
    p.add_argument("--overlap-mix", type=float, default=d.overlap_mix)


def _synth_spec(args):
    return SynthSpec(
        k=args.k,
        users_per_group=args.users_per_group,
        messages_per_user=args.messages_per_user,
        vocab_per_corpus=args.vocab_per_corpus,
        message_length=(args.min_length, args.max_length),
        overlap_mix=args.overlap_mix,
        seed=args.seed,
    )


def cmd_synth(args):
    ds = generate(_synth_spec(args))
    if args.out:
        write_dataset(ds, args.out)
    else:
        _dump(to_bundle(ds))


def cmd_ingest(args):
    ds = ingest(args.claims, args.incidences, args.edges, args.labels)
    if args.out:
        write_dataset(ds, args.out)
    else:
        _dump(to_bundle(ds))


# -- fit -------------------------------------------------------------------


def _add_fit_args(p, defaults=FitConfig(), shared=True):
    p.add_argument("--belief", default=None, help="star:K | identity:K | file:PATH (default star:K)")
    if shared:  # benchmark takes --k and --seed from the generator options
        p.add_argument("--k", type=int, default=None, help="number of belief regions (default from --belief or 4)")
        p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=defaults.mode.value)
    p.add_argument("--no-m", action="store_true", help="skip similarity interpolation")
    p.add_argument("--no-s", action="store_true", help="skip social smoothing")
    p.add_argument("--symmetrize-graph", action="store_true")
    p.add_argument("--lambda1", type=float, default=defaults.lambda1)
    p.add_argument("--lambda2", type=float, default=defaults.lambda2)
    p.add_argument("--eta", type=_eta, default=defaults.eta, help=f"step size or {MULTIPLICATIVE!r}")
    p.add_argument("--eps-clip", type=float, default=defaults.eps_clip)
    p.add_argument("--max-iters", type=int, default=defaults.max_iters)
    p.add_argument("--tol", type=float, default=defaults.tol)
    p.add_argument("--eps-rbf", type=float, default=defaults.eps_rbf)
    p.add_argument("--cutoff", type=float, default=defaults.cutoff)


def _belief_and_config(args):
    belief = parse_belief(args.belief) if args.belief else None
    k = args.k or (belief.k if belief is not None else 4)
    if belief is None and args.mode == Mode.BSMF.value:
        from .belief import star_structure

        belief = star_structure(k)
    cfg = FitConfig(
        k=k,
        mode=args.mode,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        eta=args.eta,
        eps_clip=args.eps_clip,
        eps_rbf=args.eps_rbf,
        cutoff=args.cutoff,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
    )
    if cfg.mode is Mode.NMF:
        belief = identity(k)
    return belief, cfg


def fit_document(ds, belief, cfg, stages, top_k=None):
    x = estimate_endorsements(ds, cfg, stages)
    result = fit(x, belief, cfg)
    f = result.factors
    a = assign(f)
    doc = {
        "kind": "fit",
        "config": cfg.to_dict(),
        "stages": {"use_m": stages.use_m, "use_s": stages.use_s, "symmetrize_graph": stages.symmetrize_graph},
        "variant": stages.variant,
        "belief": None if cfg.mode is Mode.NMTF or belief is None else belief.to_json(),
        "dataset": {"metadata": ds.metadata, "digest": digest(to_bundle(ds))},
        "source_ids": ds.source_ids,
        "claim_ids": ds.claim_ids,
        "labels": {ds.claim_ids[j]: r for j, r in sorted(ds.labels.items())},
        "u": f.u.tolist(),
        "m": f.m.tolist(),
        "b_tilde": None if f.b_tilde is None else f.b_tilde.tolist(),
        "claim_region": a.claim_region.tolist(),
        "claim_score": a.claim_score.tolist(),
        "source_region": a.source_region.tolist(),
        "loss_trace": list(result.loss_trace),
        "iterations_run": result.iterations_run,
        "converged": result.converged,
    }
    if top_k:
        doc["top_k"] = {str(r): top_k_claims(f, r, top_k, ds.claim_ids) for r in range(cfg.k)}
    try:
        doc["metrics"] = metrics_for(doc)
    except InputError as exc:  # the fit itself is still usable
        doc["metrics"], doc["metrics_error"] = None, str(exc)
    return doc


def metrics_for(doc, pin_overlap=False):
    """Score claim assignments against the labeled claims, or None without labels."""
    labels = doc.get("labels") or {}
    if not labels:
        return None
    k = doc["config"]["k"]
    index = {c: j for j, c in enumerate(doc["claim_ids"])}
    js = [index[c] for c in labels]
    truth = np.array([labels[c] for c in labels])
    if truth.size and truth.max() >= k:
        raise InputError(f"labels use regions up to {truth.max()} but k={k}")
    pred = np.array(doc["claim_region"])[js]
    report = evaluate(pred, truth, k, pin_overlap=pin_overlap).to_json()
    report["labeled_claims"] = len(js)
    report["coverage"] = len(js) / len(doc["claim_ids"]) if doc["claim_ids"] else 0.0
    if "top_k" in doc:
        top = {c for claims in doc["top_k"].values() for c in claims}
        annotated = top & set(labels)
        report["top_k_coverage"] = len(annotated) / len(top) if top else 0.0
        sel = [index[c] for c in sorted(annotated, key=index.get)]
        if sel:
            t = np.array([labels[doc["claim_ids"][j]] for j in sel])
            p = np.array(doc["claim_region"])[sel]
            report["top_k_metrics"] = evaluate(p, t, k, pin_overlap=pin_overlap).to_json()
    return report


def write_fit_artifacts(doc, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _dump(doc, d / "fit.json")
    k = doc["config"]["k"]
    header = ",".join(f"r{q}" for q in range(k))
    np.savetxt(d / "U.csv", np.array(doc["u"]).reshape(-1, k), delimiter=",", header="source_id," + header, comments="", fmt="%.17g")
    _prefix_ids(d / "U.csv", doc["source_ids"])
    np.savetxt(d / "M.csv", np.array(doc["m"]).reshape(-1, k), delimiter=",", header="claim_id," + header, comments="", fmt="%.17g")
    _prefix_ids(d / "M.csv", doc["claim_ids"])
    if doc["b_tilde"] is not None:
        np.savetxt(d / "B_tilde.csv", np.array(doc["b_tilde"]), delimiter=",", fmt="%.17g")
    with open(d / "assignments.csv", "w", encoding="utf-8") as fh:
        fh.write("claim_id,region,score\n")
        for c, r, s in zip(doc["claim_ids"], doc["claim_region"], doc["claim_score"]):
            fh.write(f"{c},{r},{s!r}\n")
    with open(d / "source_assignments.csv", "w", encoding="utf-8") as fh:
        fh.write("source_id,region\n")
        for s, r in zip(doc["source_ids"], doc["source_region"]):
            fh.write(f"{s},{r}\n")
    with open(d / "loss_trace.csv", "w", encoding="utf-8") as fh:
        fh.write("iteration,loss\n")
        for i, v in enumerate(doc["loss_trace"], start=1):
            fh.write(f"{i},{v!r}\n")
    if doc.get("metrics") is not None:
        _dump({"config": doc["config"], "dataset": doc["dataset"], **doc["metrics"]}, d / "metrics.json")


def _prefix_ids(path, ids):
    lines = Path(path).read_text().splitlines()
    out = [lines[0]] + [f"{i},{row}" for i, row in zip(ids, lines[1:])]
    Path(path).write_text("\n".join(out) + "\n")


def cmd_fit(args):
    ds = _load_dataset(args.data)
    belief, cfg = _belief_and_config(args)
    stages = Stages(use_m=not args.no_m, use_s=not args.no_s, symmetrize_graph=args.symmetrize_graph)
    doc = fit_document(ds, belief, cfg, stages, top_k=args.top_k)
    if args.out:
        write_fit_artifacts(doc, args.out)
    else:
        _dump(doc)


# -- eval / report ---------------------------------------------------------


def cmd_eval(args):
    doc = _load_fit(args.fit)
    metrics = metrics_for(doc, pin_overlap=args.pin_overlap)
    if metrics is None:
        raise InputError("fit document carries no labels to evaluate against")
    out = {"kind": "metrics", "config": doc["config"], "variant": doc.get("variant"), "dataset": doc["dataset"], **metrics}
    _dump(out, args.out)


def render_table(name, metrics):
    """Macro and weighted precision/recall/F-score in one row."""
    head = f"{'Method':<12}| {'Macro P':>8} {'Macro R':>8} {'Macro F':>8} | {'Wtd P':>8} {'Wtd R':>8} {'Wtd F':>8}"
    row = (
        f"{name:<12}| {metrics['macro_precision']:8.3f} {metrics['macro_recall']:8.3f} {metrics['macro_f1']:8.3f} "
        f"| {metrics['weighted_precision']:8.3f} {metrics['weighted_recall']:8.3f} {metrics['weighted_f1']:8.3f}"
    )
    return "\n".join([head, "-" * len(head), row])


def cmd_report(args):
    doc = _load_fit(args.fit)
    name = doc["config"]["mode"].upper()
    if doc.get("variant", "full") != "full":
        name += f" ({doc['variant']})"
    lines = [f"iterations: {doc['iterations_run']}  converged: {doc['converged']}  final loss: {doc['loss_trace'][-1]:.6g}"]
    metrics = metrics_for(doc, pin_overlap=args.pin_overlap)
    if metrics is not None:
        lines.append(f"accuracy: {metrics['accuracy']:.4f}  labeled claims: {metrics['labeled_claims']} (coverage {metrics['coverage']:.1%})")
        lines.append(render_table(name, metrics))
    else:
        lines.append("no labels: metrics skipped")
    if args.top_k:
        f = FactorPair(np.array(doc["u"]), np.array(doc["m"]))
        for r in range(doc["config"]["k"]):
            lines.append(f"region {r}: " + ", ".join(top_k_claims(f, r, args.top_k, doc["claim_ids"])))
    print("\n".join(lines))


# -- benchmark -------------------------------------------------------------


def cmd_benchmark(args):
    spec = _synth_spec(args)
    belief, cfg = _belief_and_config(args)
    stages = Stages(use_m=not args.no_m, use_s=not args.no_s, symmetrize_graph=args.symmetrize_graph)
    modes = [Mode(m) for m in args.models.split(",")]
    results = bench.run_benchmark(
        args.rounds, spec, cfg, stages, modes, belief if cfg.mode is Mode.BSMF else None, workers=args.workers
    )
    summary = bench.summarize(results, within=args.within)
    out = Path(args.out)
    bench.write_results(results, summary, out)
    _dump({"synth_spec": spec.to_dict(), "config": cfg.to_dict(), "stages": stages.variant, "rounds": args.rounds}, out / "benchmark.json")
    for row in summary:
        print(f"{row['model']:<6} mean={row['mean_accuracy']:.4f} std={row['std_accuracy']:.4f} converged={row['converged_fraction']:.2f}")


# -- entry point -----------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="bsmf", description="Belief-structured matrix factorization pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    _add_synth_args(s)
    s.add_argument("--out", help="dataset directory (default: JSON bundle on stdout)")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", help="validate CSV/JSONL inputs into a dataset")
    s.add_argument("--claims", required=True)
    s.add_argument("--incidences", required=True)
    s.add_argument("--edges")
    s.add_argument("--labels")
    s.add_argument("--out", help="dataset directory (default: JSON bundle on stdout)")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("fit", help="interpolate, smooth and factorize a dataset")
    s.add_argument("--data", default="-", help="dataset directory or JSON bundle (default: stdin)")
    _add_fit_args(s)
    s.add_argument("--top-k", type=int, default=None)
    s.add_argument("--out", help="artifact directory (default: JSON document on stdout)")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("eval", help="score a fit against its labels")
    s.add_argument("--fit", default="-", help="fit directory or JSON document (default: stdin)")
    s.add_argument("--pin-overlap", action="store_true", help="keep region 0 fixed during alignment")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("report", help="print a metrics table and top claims")
    s.add_argument("--fit", default="-")
    s.add_argument("--pin-overlap", action="store_true")
    s.add_argument("--top-k", type=int, default=None)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("benchmark", help="repeat synthetic runs for BSMF, NMF and NMTF")
    s.add_argument("--rounds", type=int, default=200)
    _add_synth_args(s)
    _add_fit_args(s, bench.BENCHMARK_CONFIG, shared=False)
    s.add_argument("--models", default="bsmf,nmf,nmtf")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--within", type=int, default=200, help="report convergence within this many iterations")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except OptimizerError as exc:
        _error(exc, {"iteration": exc.iteration})
        return EXIT_DIVERGED
    except (BsmfError, OSError) as exc:
        _error(exc)
        return EXIT_INPUT
    return 0


def _error(exc, extra=None):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    doc.update(extra or {})
    sys.stderr.write(json.dumps(doc) + "\n")


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
