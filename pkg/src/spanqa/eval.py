"""Attachment scores, span recall and length-bucketed reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .conllu import DEFAULT_PUNCT
from .errors import NonProjectiveError
from .model import DepTree, Sentence, gold_spans

SENTENCE_EDGES = (10, 20, 30, 40, 50)  # 1-10, 11-20, ..., 41-50, >50
DEPENDENCY_EDGES = (1, 2, 3, 4, 5, 7, 10)
SPAN_EDGES = (1, 2, 4, 7, 12, 20)  # seven buckets of average subtree span length


def _scored_tokens(sent: Sentence, punct_set) -> list[int]:
    return [i for i in range(1, sent.n + 1) if sent.tokens[i].upos not in punct_set]


def attachment_counts(pred: DepTree, gold: DepTree, sent: Sentence, punct_set=DEFAULT_PUNCT):
    """(tokens scored, correct heads, correct heads+labels)."""
    if not (pred.n == gold.n == sent.n):
        raise ValueError(f"length mismatch: pred {pred.n}, gold {gold.n}, sentence {sent.n}")
    total = uh = lh = 0
    for i in _scored_tokens(sent, punct_set):
        total += 1
        if pred.head(i) == gold.head(i):
            uh += 1
            if pred.label(i) == gold.label(i):
                lh += 1
    return total, uh, lh


def uas_las(pred: DepTree, gold: DepTree, sent: Sentence, punct_set=DEFAULT_PUNCT) -> tuple[float, float]:
    total, uh, lh = attachment_counts(pred, gold, sent, punct_set)
    if total == 0:
        return 1.0, 1.0
    return uh / total, lh / total


def corpus_uas_las(preds: Sequence[DepTree], golds: Sequence[DepTree], sents: Sequence[Sentence],
                   punct_set=DEFAULT_PUNCT) -> tuple[float, float]:
    """Token-level micro average."""
    total = uh = lh = 0
    for p, g, s in zip(preds, golds, sents, strict=True):
        t, u, l = attachment_counts(p, g, s, punct_set)
        total, uh, lh = total + t, uh + u, lh + l
    if total == 0:
        return 1.0, 1.0
    return uh / total, lh / total


def span_recall(candidates, gold: Iterable, include_root: bool = False) -> float:
    """Fraction of gold subtree spans present (exact root/start/end match).

    ``candidates`` may be a CandidateSet or any collection of spans. The
    root span is always a candidate, so it is excluded unless asked for.
    """
    have = candidates.span_set() if hasattr(candidates, "span_set") else {tuple(c) for c in candidates}
    gold = [tuple(g) for g in gold if include_root or g[0] != 0]
    if not gold:
        return 1.0
    return sum(g in have for g in gold) / len(gold)


def recall_counts(candidates, gold: Iterable) -> tuple[int, int]:
    have = candidates.span_set() if hasattr(candidates, "span_set") else {tuple(c) for c in candidates}
    gold = [tuple(g) for g in gold if g[0] != 0]
    return sum(g in have for g in gold), len(gold)


def bucket_of(value: float, edges: Sequence[int]) -> str:
    lo = 1
    for e in edges:
        if value <= e:
            return f"{lo}-{e}" if lo != e else f"{e}"
        lo = e + 1
    return f">{edges[-1]}"


def bucket_names(edges: Sequence[int]) -> list[str]:
    names, lo = [], 1
    for e in edges:
        names.append(f"{lo}-{e}" if lo != e else f"{e}")
        lo = e + 1
    names.append(f">{edges[-1]}")
    return names


@dataclass
class BucketRow:
    bucket: str
    tokens: int = 0
    correct: int = 0
    spans: int = 0
    spans_found: int = 0

    @property
    def uas(self) -> float:
        return self.correct / self.tokens if self.tokens else float("nan")

    @property
    def recall(self) -> float:
        return self.spans_found / self.spans if self.spans else float("nan")


@dataclass
class BucketReport:
    bucketing: str
    rows: list[BucketRow] = field(default_factory=list)

    @property
    def tokens(self) -> int:
        return sum(r.tokens for r in self.rows)

    @property
    def uas(self) -> float:
        return sum(r.correct for r in self.rows) / max(1, self.tokens)

    def nonempty(self) -> list[BucketRow]:
        return [r for r in self.rows if r.tokens]

    def to_tsv(self) -> str:
        with_recall = self.bucketing == "subtree-span-length"
        head = ["bucket", "tokens", "uas"] + (["span_recall"] if with_recall else [])
        lines = ["\t".join(head)]
        for r in self.rows:
            cells = [r.bucket, str(r.tokens), f"{r.uas:.4f}"]
            if with_recall:
                cells.append(f"{r.recall:.4f}")
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        with_recall = self.bucketing == "subtree-span-length"
        out = [f"UAS by {self.bucketing}", f"{'bucket':>10} {'tokens':>8} {'UAS':>8}" + (f" {'recall':>8}" if with_recall else "")]
        for r in self.rows:
            line = f"{r.bucket:>10} {r.tokens:>8d} {r.uas:>8.4f}"
            if with_recall:
                line += f" {r.recall:>8.4f}"
            out.append(line)
        out.append(f"{'all':>10} {self.tokens:>8d} {self.uas:>8.4f}")
        return "\n".join(out) + "\n"


def bucket_report(preds: Sequence[DepTree], golds: Sequence[DepTree], sents: Sequence[Sentence],
                  bucketing: str = "sentence-length", edges: Optional[Sequence[int]] = None,
                  punct_set=DEFAULT_PUNCT) -> BucketReport:
    """Per-bucket UAS over non-punctuation tokens.

    ``sentence-length`` buckets whole sentences by n; ``dependency-length``
    buckets tokens by |head - dependent| of the gold arc; ``subtree-span-length``
    buckets gold arcs by the mean length of the parent and child spans and
    also reports how many gold child spans the prediction reproduces.
    """
    default = {"sentence-length": SENTENCE_EDGES, "dependency-length": DEPENDENCY_EDGES,
               "subtree-span-length": SPAN_EDGES}
    if bucketing not in default:
        raise ValueError(f"unknown bucketing {bucketing!r}")
    edges = tuple(edges or default[bucketing])
    rows = {name: BucketRow(name) for name in bucket_names(edges)}
    for pred, gold, sent in zip(preds, golds, sents, strict=True):
        if not (pred.n == gold.n == sent.n):
            raise ValueError("length mismatch")
        scored = _scored_tokens(sent, punct_set)
        if bucketing == "subtree-span-length":
            try:
                gs = gold_spans(gold)
            except NonProjectiveError:
                continue
            try:
                ps = gold_spans(pred)
            except NonProjectiveError:
                ps = [None] * len(gs)
        for i in scored:
            if bucketing == "sentence-length":
                b = bucket_of(sent.n, edges)
            elif bucketing == "dependency-length":
                b = bucket_of(abs(gold.head(i) - i), edges)
            else:
                par, ch = gs[gold.head(i)], gs[i]
                par_len = (par.end - par.start + 1) if par.root else sent.n
                b = bucket_of(((par_len) + (ch.end - ch.start + 1)) / 2, edges)
                rows[b].spans += 1
                rows[b].spans_found += ps[i] == ch
            rows[b].tokens += 1
            rows[b].correct += pred.head(i) == gold.head(i)
    return BucketReport(bucketing, list(rows.values()))
