"""Dataset container and its plain-text on-disk format.

A dataset directory holds::

    claims.jsonl      {"claim_id": str, "text": str} per line
    incidences.csv    source_id,claim_id
    edges.csv         retweeter_id,author_id,count     (optional)
    labels.csv        claim_id,region                  (optional)
    metadata.json     free-form generation/ingest parameters (optional)

CSV files may start with the header row shown above.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .interpolation import tokenize
from .linalg import canonical

CLAIMS = "claims.jsonl"
INCIDENCES = "incidences.csv"
EDGES = "edges.csv"
LABELS = "labels.csv"
METADATA = "metadata.json"

_HEADERS = {
    INCIDENCES: ["source_id", "claim_id"],
    EDGES: ["retweeter_id", "author_id", "count"],
    LABELS: ["claim_id", "region"],
}


@dataclass
class Dataset:
    source_ids: list
    claim_ids: list
    claim_texts: list
    incidences: list  # (source index, claim index), unique
    edges: list = field(default_factory=list)  # (retweeter index, author index, count)
    labels: dict = field(default_factory=dict)  # claim index -> region
    metadata: dict = field(default_factory=dict)

    @property
    def n_sources(self):
        return len(self.source_ids)

    @property
    def n_claims(self):
        return len(self.claim_ids)

    def token_lists(self):
        return [tokenize(t) for t in self.claim_texts]

    def source_claim_matrix(self):
        n = len(self.incidences)
        if n:
            rows, cols = np.array(self.incidences, dtype=np.int64).T
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        return canonical(sp.coo_array((np.ones(n), (rows, cols)), shape=(self.n_sources, self.n_claims)))

    def social_matrix(self):
        n = self.n_sources
        if self.edges:
            rows = np.array([e[0] for e in self.edges], dtype=np.int64)
            cols = np.array([e[1] for e in self.edges], dtype=np.int64)
            vals = np.array([e[2] for e in self.edges], dtype=np.float64)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
        return canonical(sp.coo_array((vals, (rows, cols)), shape=(n, n)))

    def label_array(self):
        """Ground-truth regions ordered by claim index, or None without labels."""
        if not self.labels:
            return None
        return np.array([self.labels.get(j, -1) for j in range(self.n_claims)], dtype=np.int64)


def _read_csv(path, name):
    text = Path(path).read_text(encoding="utf-8")
    header = _HEADERS[name]
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        row = [c.strip() for c in row]
        if lineno == 1 and row == header:
            continue
        if len(row) != len(header):
            raise InputError(f"expected {len(header)} fields ({','.join(header)}), got {len(row)}", path, lineno)
        rows.append((lineno, row))
    return rows


def _read_claims(path):
    ids, texts, index = [], [], {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                cid, text = str(rec["claim_id"]), rec["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"bad claim record ({exc.__class__.__name__}: {exc})", path, lineno) from None
            if not isinstance(text, str):
                raise InputError("claim text must be a string", path, lineno)
            if cid in index:
                raise InputError(f"duplicate claim_id {cid!r}", path, lineno)
            index[cid] = len(ids)
            ids.append(cid)
            texts.append(text)
    return ids, texts, index


def ingest(claims, incidences, edges=None, labels=None, metadata=None):
    """Read the CSV/JSONL files into a :class:`Dataset`.

    Source ids are interned in order of first appearance in the incidence
    file; duplicate incidences collapse to one.

    Raises
    ------
    InputError
        For malformed rows (with the line number) and for ids that do not
        resolve to a known claim or source.
    """
    claim_ids, texts, claim_index = _read_claims(claims)

    source_ids, source_index = [], {}
    seen, pairs = set(), []
    for lineno, (sid, cid) in _read_csv(incidences, INCIDENCES):
        if cid not in claim_index:
            raise InputError(f"unknown claim_id {cid!r}", incidences, lineno)
        if sid not in source_index:
            source_index[sid] = len(source_ids)
            source_ids.append(sid)
        pair = (source_index[sid], claim_index[cid])
        if pair not in seen:
            seen.add(pair)
            pairs.append(pair)

    edge_list = []
    if edges is not None and Path(edges).exists():
        for lineno, (rid, aid, count) in _read_csv(edges, EDGES):
            for sid in (rid, aid):
                if sid not in source_index:
                    raise InputError(f"unknown source id {sid!r}", edges, lineno)
            try:
                c = float(count)
            except ValueError:
                raise InputError(f"count {count!r} is not a number", edges, lineno) from None
            if not np.isfinite(c) or c < 0:
                raise InputError(f"count must be finite and non-negative, got {count}", edges, lineno)
            edge_list.append((source_index[rid], source_index[aid], c))

    label_map = {}
    if labels is not None and Path(labels).exists():
        for lineno, (cid, region) in _read_csv(labels, LABELS):
            if cid not in claim_index:
                raise InputError(f"unknown claim_id {cid!r}", labels, lineno)
            try:
                r = int(region)
            except ValueError:
                raise InputError(f"region {region!r} is not an integer", labels, lineno) from None
            if r < 0:
                raise InputError("region must be non-negative", labels, lineno)
            label_map[claim_index[cid]] = r

    meta = {}
    if metadata is not None and Path(metadata).exists():
        try:
            meta = json.loads(Path(metadata).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"bad metadata JSON: {exc}", metadata) from None
    meta.setdefault("ingest", {"claims": str(claims), "incidences": str(incidences)})
    return Dataset(source_ids, claim_ids, texts, pairs, edge_list, label_map, meta)


def read_dataset(directory):
    d = Path(directory)
    if not (d / CLAIMS).exists() or not (d / INCIDENCES).exists():
        raise InputError(f"{d} does not contain {CLAIMS} and {INCIDENCES}")
    return ingest(d / CLAIMS, d / INCIDENCES, d / EDGES, d / LABELS, d / METADATA)


def write_dataset(ds, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / CLAIMS, "w", encoding="utf-8") as fh:
        for cid, text in zip(ds.claim_ids, ds.claim_texts):
            fh.write(json.dumps({"claim_id": cid, "text": text}) + "\n")
    _write_csv(d / INCIDENCES, INCIDENCES, ([ds.source_ids[i], ds.claim_ids[j]] for i, j in ds.incidences))
    _write_csv(d / EDGES, EDGES, ([ds.source_ids[i], ds.source_ids[j], _num(c)] for i, j, c in ds.edges))
    if ds.labels:
        _write_csv(d / LABELS, LABELS, ([ds.claim_ids[j], r] for j, r in sorted(ds.labels.items())))
    (d / METADATA).write_text(json.dumps(ds.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return d


def _num(c):
    return int(c) if float(c).is_integer() else c


def _write_csv(path, name, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_HEADERS[name])
        w.writerows(rows)


def to_bundle(ds):
    """JSON-serializable form used to stream a dataset between CLI stages."""
    return {
        "kind": "dataset",
        "source_ids": ds.source_ids,
        "claims": [{"claim_id": c, "text": t} for c, t in zip(ds.claim_ids, ds.claim_texts)],
        "incidences": [[ds.source_ids[i], ds.claim_ids[j]] for i, j in ds.incidences],
        "edges": [[ds.source_ids[i], ds.source_ids[j], _num(c)] for i, j, c in ds.edges],
        "labels": {ds.claim_ids[j]: r for j, r in sorted(ds.labels.items())},
        "metadata": ds.metadata,
    }


def from_bundle(doc):
    if doc.get("kind") != "dataset":
        raise InputError(f"expected a dataset bundle, got kind {doc.get('kind')!r}")
    try:
        claim_ids = [str(c["claim_id"]) for c in doc["claims"]]
        texts = [c["text"] for c in doc["claims"]]
        claim_index = {c: j for j, c in enumerate(claim_ids)}
        source_ids = [str(s) for s in doc["source_ids"]]
        source_index = {s: i for i, s in enumerate(source_ids)}
        seen, pairs = set(), []
        for sid, cid in doc["incidences"]:
            pair = (source_index[sid], claim_index[cid])
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
        edges = [(source_index[r], source_index[a], float(c)) for r, a, c in doc.get("edges", [])]
        labels = {claim_index[c]: int(r) for c, r in doc.get("labels", {}).items()}
    except KeyError as exc:
        raise InputError(f"dataset bundle references unknown id {exc}") from None
    return Dataset(source_ids, claim_ids, texts, pairs, edges, labels, dict(doc.get("metadata", {})))
