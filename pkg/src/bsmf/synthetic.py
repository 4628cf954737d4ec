"""Labeled synthetic datasets with one overlap belief and ``k - 1`` exclusive ones.

Every belief gets its own word corpus (corpora are pairwise disjoint) and a
group of users.  Overlap users write only with overlap words; a user of
exclusive belief ``g`` draws each token from the overlap corpus with
probability ``overlap_mix`` and from corpus ``g`` otherwise.  Every message is
a claim endorsed only by its author and labeled with the author's group.
No social edges are produced, so the propagation operator is the identity.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .dataset import Dataset
from .errors import ValidationError


@dataclass(frozen=True)
class SynthSpec:
    k: int = 4
    users_per_group: int = 100
    messages_per_user: int = 10
    vocab_per_corpus: int = 200
    message_length: tuple = (8, 15)
    overlap_mix: float = 0.3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "message_length", tuple(int(v) for v in self.message_length))
        if self.k < 2:
            raise ValidationError("need at least the overlap and one exclusive belief (k >= 2)")
        if self.users_per_group < 1 or self.messages_per_user < 1:
            raise ValidationError("users_per_group and messages_per_user must be positive")
        if self.vocab_per_corpus < 1:
            raise ValidationError("vocab_per_corpus must be positive to build disjoint corpora")
        lo, hi = self.message_length
        if not 1 <= lo <= hi:
            raise ValidationError("message_length must satisfy 1 <= min <= max")
        if not 0 <= self.overlap_mix <= 1:
            raise ValidationError("overlap_mix must lie in [0, 1]")

    def to_dict(self):
        d = asdict(self)
        d["message_length"] = list(self.message_length)
        return d


def corpus_word(corpus, index):
    return f"c{corpus}_w{index}"


def generate(spec=SynthSpec()):
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.message_length
    source_ids, claim_ids, texts, incidences, labels = [], [], [], [], {}
    for group in range(spec.k):
        for _ in range(spec.users_per_group):
            i = len(source_ids)
            source_ids.append(f"u{i:05d}")
            for _ in range(spec.messages_per_user):
                n = int(rng.integers(lo, hi + 1))
                words = rng.integers(0, spec.vocab_per_corpus, size=n)
                if group == 0:
                    corpora = np.zeros(n, dtype=np.int64)
                else:
                    corpora = np.where(rng.random(n) < spec.overlap_mix, 0, group)
                j = len(claim_ids)
                claim_ids.append(f"m{j:06d}")
                texts.append(" ".join(corpus_word(c, w) for c, w in zip(corpora, words)))
                incidences.append((i, j))
                labels[j] = group
    meta = {"generator": "synthetic", "synth_spec": spec.to_dict()}
    return Dataset(source_ids, claim_ids, texts, incidences, [], labels, meta)
