"""Feature-hashed log-linear scorer trained with the span and link losses.

Heads and their losses (summed over one sentence):

* ``start`` / ``end``: softmax cross-entropy picking each real token's
  gold subtree start (end) among tokens 1..n; the root row gets no loss.
* ``parent_root`` / ``parent_start`` / ``parent_end`` / ``parent_label``:
  for each gold child span as query, softmax cross-entropy over the
  context 0..n for the root, start and end of its gold parent span, plus
  softmax over labels at the gold parent root.
* ``child_root`` / ``child_start`` / ``child_end``: for each gold span as
  query, per-token binary cross-entropy marking the roots (starts, ends)
  of all its children; ``child_label`` is a softmax over labels per arc.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..conllu import Instance, TreebankDoc, make_instances
from ..errors import ConfigError, EmptyTreebankError, NotFittedError
from ..model import Sentence, SubtreeSpan
from . import features as F
from .tables import LINK_FIELDS, ScoreTables, log_softmax, span_table_from_raw

log = logging.getLogger(__name__)

HEADS = (
    "start", "end",
    "parent_root", "parent_start", "parent_end", "parent_label",
    "child_root", "child_start", "child_end", "child_label",
)
UNK_LABEL = "<unk>"


@dataclass
class TrainConfig:
    epochs: int = 10
    lr: float = 0.5
    lr_decay: float = 0.1  # lr / (1 + lr_decay * epoch)
    l2: float = 0.0
    seed: int = 0
    feature_bits: int = 20
    shuffle: bool = True


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _sparse(idx, dscore):
    """Collapse d(loss)/d(score) over feature indices into (unique idx, grad)."""
    flat = idx.reshape(-1)
    vals = np.repeat(dscore.reshape(-1), idx.shape[-1])
    u, inv = np.unique(flat, return_inverse=True)
    return u, np.bincount(inv.reshape(-1), weights=vals, minlength=len(u))


def softmax_xent(w, idx, gold):
    """idx (R, C, F), gold (R,) -> loss, (indices, grad)."""
    if idx.shape[0] == 0:
        return 0.0, (np.zeros(0, np.int64), np.zeros(0))
    scores = w[idx].sum(-1)
    logp = log_softmax(scores, axis=-1)
    rows = np.arange(len(gold))
    loss = -float(logp[rows, gold].sum())
    d = np.exp(logp)
    d[rows, gold] -= 1.0
    return loss, _sparse(idx, d)


def binary_xent(w, idx, target):
    """idx (R, C, F), target (R, C) in {0, 1}."""
    if idx.shape[0] == 0:
        return 0.0, (np.zeros(0, np.int64), np.zeros(0))
    z = w[idx].sum(-1)
    loss = float((_softplus(z) - target * z).sum())
    return loss, _sparse(idx, _sigmoid(z) - target)


@dataclass
class InstanceFeatures:
    """Cached feature indices and targets for one training sentence."""

    idx: dict
    gold: dict


class LogLinearModel:
    """Hashed linear scores turned into log-distributions, one weight vector per head."""

    def __init__(self, labels: Sequence[str], feature_bits: int = 20, seed: int = 0):
        labels = [l for l in labels if l != UNK_LABEL]
        self.labels = tuple(sorted(set(labels))) + (UNK_LABEL,)
        self.feature_bits = int(feature_bits)
        self.seed = int(seed)
        self.dim = 1 << self.feature_bits
        self.mask = self.dim - 1
        self.weights = {h: np.zeros(self.dim) for h in HEADS}
        self.history: list[dict] = []
        self.fitted = False
        self.settings: dict = {}  # decoding settings chosen at training time, e.g. lambda
        self._label_id = {l: i for i, l in enumerate(self.labels)}

    # -- identity

    @property
    def feature_config(self) -> dict:
        return {"feature_bits": self.feature_bits, "template_version": F.TEMPLATE_VERSION,
                "labels": list(self.labels)}

    def label_id(self, label: str) -> int:
        return self._label_id.get(label, self._label_id[UNK_LABEL])

    # -- raw scores

    def _scores(self, head, idx):
        return self.weights[head][idx].sum(-1)

    def span_logits(self, sent: Sentence, codes=None):
        sc = codes or F.SentenceCodes(sent)
        return (self._scores("start", F.span_features(sc, "start", self.mask)),
                self._scores("end", F.span_features(sc, "end", self.mask)))

    def link_logits(self, sent: Sentence, spans: Sequence[SubtreeSpan], codes=None) -> dict:
        sc = codes or F.SentenceCodes(sent)
        spans = np.asarray(spans, dtype=np.int64).reshape(-1, 3)
        out = {}
        for head, idx in F.parent_features(sc, spans, self.mask).items():
            out[head] = self._scores(head, idx)
        for head, idx in F.child_features(sc, spans, self.mask).items():
            out[head] = self._scores(head, idx)
        T = np.arange(sc.n + 1)[None, :]
        lab = F.parent_label_features(sc, spans[:, :1], T, len(self.labels), self.mask)
        out["label"] = self._scores("parent_label", lab)
        return out

    def child_probabilities(self, sent: Sentence, parent: SubtreeSpan) -> dict:
        """Raw per-token sigmoid outputs of the child heads for one parent query."""
        raw = self.link_logits(sent, [parent])
        return {k: _sigmoid(raw[k][0]) for k in ("child_root", "child_start", "child_end")}

    def tables(self, sent: Sentence, queries: Iterable[SubtreeSpan] = ()) -> ScoreTables:
        """ScoreTables for ``sent``; link rows for further queries are computed on demand."""
        if not self.fitted:
            raise NotFittedError("model has not been trained")
        sc = F.SentenceCodes(sent)
        raw_s, raw_e = self.span_logits(sent, sc)

        def provider(spans):
            raw = self.link_logits(sent, spans, sc)
            rows = {k: log_softmax(raw[k], axis=1) for k in LINK_FIELDS}
            rows["label"] = log_softmax(raw["label"], axis=2)
            return rows

        t = ScoreTables(sent.n, self.labels, span_table_from_raw(raw_s, "start"),
                        span_table_from_raw(raw_e, "end"), provider=provider)
        t.ensure(queries)
        return t

    # -- training objective

    def instance_features(self, inst: Instance) -> InstanceFeatures:
        if inst.spans is None:
            raise ValueError("span targets need a projective tree")
        sent, spans, tree = inst.sentence, inst.spans, inst.tree
        n, L, m = sent.n, len(self.labels), self.mask
        sc = F.SentenceCodes(sent)
        idx, gold = {}, {}
        idx["start"] = F.span_features(sc, "start", m)
        idx["end"] = F.span_features(sc, "end", m)
        gold["start"] = np.array([sp.start - 1 for sp in spans[1:]])
        gold["end"] = np.array([sp.end - 1 for sp in spans[1:]])

        heads = np.array(tree.heads)
        child_q = np.asarray(spans[1:], dtype=np.int64)  # each real token's span queries its parent
        par = np.asarray([spans[h] for h in heads], dtype=np.int64)
        idx.update(F.parent_features(sc, child_q, m))
        gold["parent_root"], gold["parent_start"], gold["parent_end"] = par[:, 0], par[:, 1], par[:, 2]
        idx["parent_label"] = F.parent_label_features(sc, child_q[:, 0], par[:, 0], L, m)
        lab = np.array([self.label_id(l) for l in tree.labels])
        gold["parent_label"] = lab

        parent_q = np.asarray(spans, dtype=np.int64)  # every span queries its children
        idx.update(F.child_features(sc, parent_q, m))
        for k, col in (("child_root", 0), ("child_start", 1), ("child_end", 2)):
            tgt = np.zeros((n + 1, n + 1))
            tgt[heads, child_q[:, col]] = 1.0
            gold[k] = tgt
        idx["child_label"] = F.child_label_features(sc, heads, np.arange(1, n + 1), L, m)
        gold["child_label"] = lab
        return InstanceFeatures(idx, gold)

    def head_loss(self, feats: InstanceFeatures, head: str, w=None):
        """Loss of one head and its sparse gradient (indices, values)."""
        w = self.weights[head] if w is None else w
        if head.startswith("child_") and head != "child_label":
            return binary_xent(w, feats.idx[head], feats.gold[head])
        return softmax_xent(w, feats.idx[head], feats.gold[head])

    def loss(self, feats: InstanceFeatures) -> float:
        return sum(self.head_loss(feats, h)[0] for h in HEADS)

    # -- persistence

    def save(self, path) -> None:
        arrays = {}
        for h, w in self.weights.items():
            nz = np.flatnonzero(w)
            arrays[f"{h}.idx"] = nz.astype(np.int64)
            arrays[f"{h}.val"] = w[nz]
        meta = {"feature_config": self.feature_config, "seed": self.seed,
                "history": self.history, "fitted": self.fitted,
                "settings": self.settings}
        arrays["meta"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
        with open(path, "wb") as f:
            np.savez_compressed(f, **arrays)

    @classmethod
    def load(cls, path) -> "LogLinearModel":
        with np.load(path) as z:
            meta = json.loads(bytes(z["meta"]).decode("utf-8"))
            cfg = meta["feature_config"]
            if cfg["template_version"] != F.TEMPLATE_VERSION:
                raise ConfigError(f"model built with feature templates v{cfg['template_version']}, "
                                  f"this version has v{F.TEMPLATE_VERSION}")
            model = cls(cfg["labels"], cfg["feature_bits"], meta["seed"])
            for h in HEADS:
                model.weights[h][z[f"{h}.idx"]] = z[f"{h}.val"]
        model.history = meta["history"]
        model.fitted = meta["fitted"]
        model.settings = meta.get("settings", {})
        return model


def _instances(data) -> list[Instance]:
    if isinstance(data, TreebankDoc):
        return make_instances(data)
    return list(data)


def train(
    data,
    config: Optional[TrainConfig] = None,
    model: Optional[LogLinearModel] = None,
    callback: Optional[Callable[[int, LogLinearModel, float], None]] = None,
) -> LogLinearModel:
    """Fit the scorer by per-sentence SGD on the summed losses of all heads.

    ``data`` is a TreebankDoc or a list of Instances. Non-projective
    sentences have no span targets and are skipped. Passing ``model``
    continues training it; its feature configuration must match ``config``.
    ``callback(epoch, model, epoch_loss)`` runs after every epoch.
    """
    config = config or TrainConfig()
    insts = _instances(data)
    if not insts:
        raise EmptyTreebankError("empty treebank")
    usable = [i for i in insts if i.projective]
    skipped = len(insts) - len(usable)
    if skipped:
        log.warning("skipping %d non-projective sentences (no span targets)", skipped)
    if not usable:
        raise EmptyTreebankError("no projective sentences to train on")
    labels = sorted({l for i in usable for l in i.tree.labels})
    if model is None:
        model = LogLinearModel(labels, config.feature_bits, config.seed)
    else:
        want = {"feature_bits": config.feature_bits, "template_version": F.TEMPLATE_VERSION}
        have = {k: model.feature_config[k] for k in want}
        if want != have:
            raise ConfigError(f"cannot resume: model feature config {have} differs from {want}")
        unknown = set(labels) - set(model.labels)
        if unknown:
            raise ConfigError(f"cannot resume: labels {sorted(unknown)} not in model")
    feats = [model.instance_features(i) for i in usable]
    rng = np.random.default_rng(config.seed)
    start_epoch = len(model.history)
    for ep in range(config.epochs):
        lr = config.lr / (1.0 + config.lr_decay * (start_epoch + ep))
        order = rng.permutation(len(feats)) if config.shuffle else np.arange(len(feats))
        total = 0.0
        for k in order:
            f = feats[k]
            for h in HEADS:
                loss, (ix, g) = model.head_loss(f, h)
                total += loss
                w = model.weights[h]
                if config.l2:
                    g = g + config.l2 * w[ix]
                w[ix] -= lr * g
        model.fitted = True
        model.history.append({"epoch": start_epoch + ep + 1, "loss": total, "lr": lr})
        log.info("epoch %d loss %.4f", start_epoch + ep + 1, total)
        if callback is not None:
            callback(start_epoch + ep + 1, model, total)
    if config.epochs == 0:
        model.fitted = True
    return model


def total_loss(model: LogLinearModel, data) -> float:
    return sum(model.loss(model.instance_features(i)) for i in _instances(data) if i.projective)
