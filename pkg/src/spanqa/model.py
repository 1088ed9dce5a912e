"""Sentences, dependency trees and subtree spans."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import CycleError, MultiRootError, NonProjectiveError, TreeIndexError

ROOT_FORM = "<root>"
ROOT_UPOS = "ROOT"


@dataclass(frozen=True)
class Token:
    form: str
    upos: str
    # LEMMA, XPOS, FEATS, DEPS, MISC kept verbatim for round-trip only.
    extra: tuple = field(default=("_", "_", "_", "_", "_"), compare=False)


@dataclass(frozen=True)
class Sentence:
    """Token sequence with the synthetic root at index 0."""

    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.tokens) < 2:
            raise ValueError("a sentence needs at least one real token")
        if self.tokens[0].form != ROOT_FORM:
            raise ValueError(f"token 0 must be {ROOT_FORM!r}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], comments=()) -> "Sentence":
        toks = [Token(ROOT_FORM, ROOT_UPOS)]
        toks.extend(Token(f, u) for f, u in pairs)
        return cls(tuple(toks), tuple(comments))

    @classmethod
    def from_words(cls, words: Sequence[str], upos: Sequence[str] | None = None) -> "Sentence":
        if upos is None:
            upos = ["X"] * len(words)
        return cls.from_pairs(zip(words, upos))

    @property
    def n(self) -> int:
        return len(self.tokens) - 1

    def __len__(self):
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def upos(self) -> list[str]:
        return [t.upos for t in self.tokens]


class SubtreeSpan(NamedTuple):
    """A candidate subtree: its root token and the inclusive token range it covers."""

    root: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start

    def contains(self, other: "SubtreeSpan") -> bool:
        return self.start <= other.start and other.end <= self.end

    def is_valid(self, n: int) -> bool:
        if self.root == 0:
            return self.start == 0 and self.end == n
        return 1 <= self.start <= self.root <= self.end <= n


def root_span(n: int) -> SubtreeSpan:
    return SubtreeSpan(0, 0, n)


class LabeledArc(NamedTuple):
    parent: int
    child: int
    label: str


@dataclass(frozen=True)
class DepTree:
    """Head and relation label for every real token (``heads[i - 1]`` is the head of token i)."""

    heads: tuple[int, ...]
    labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.heads)

    def head(self, i: int) -> int:
        return self.heads[i - 1]

    def label(self, i: int) -> str:
        return self.labels[i - 1]

    def heads_array(self) -> np.ndarray:
        """Heads indexed by token, with -1 for the root token."""
        return np.array((-1,) + self.heads, dtype=np.int64)

    def arcs(self) -> list[LabeledArc]:
        return [LabeledArc(h, i, l) for i, (h, l) in enumerate(zip(self.heads, self.labels), 1)]

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i, h in enumerate(self.heads, 1):
            kids[h].append(i)
        return kids

    def root_child(self) -> int:
        return self.heads.index(0) + 1

    def yields(self) -> list[list[int]]:
        """Sorted token indices dominated by each token (itself included)."""
        kids = self.children()
        order = [0]
        for i in order:
            order.extend(kids[i])
        out: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i in reversed(order):
            acc = [i]
            for c in kids[i]:
                acc.extend(out[c])
            acc.sort()
            out[i] = acc
        return out


def validate_tree(heads: Sequence[int], labels: Sequence[str] | None, n: int) -> DepTree:
    heads = tuple(int(h) for h in heads)
    if len(heads) != n:
        raise TreeIndexError(f"expected {n} heads, got {len(heads)}")
    if labels is None:
        labels = ("_",) * n
    labels = tuple(labels)
    if len(labels) != n:
        raise TreeIndexError(f"expected {n} labels, got {len(labels)}")
    for i, h in enumerate(heads, 1):
        if not 0 <= h <= n:
            raise TreeIndexError(f"head {h} of token {i} outside [0, {n}]")
        if h == i:
            raise CycleError(f"token {i} is its own head")
    n_roots = heads.count(0)
    if n_roots > 1:
        raise MultiRootError(f"{n_roots} tokens attached to the root")
    if n_roots == 0:
        raise CycleError("no token attached to the root")
    state = [0] * (n + 1)  # 0 unseen, 1 on current path, 2 reaches root
    state[0] = 2
    for i in range(1, n + 1):
        path = []
        j = i
        while state[j] == 0:
            state[j] = 1
            path.append(j)
            j = heads[j - 1]
        if state[j] == 1:
            raise CycleError(f"cycle through token {j}")
        for p in path:
            state[p] = 2
    return DepTree(heads, labels)


def is_projective(tree: DepTree) -> bool:
    """No two arcs cross, the root arc included."""
    intervals = [(min(h, d), max(h, d)) for d, h in enumerate(tree.heads, 1)]
    for a, (l1, r1) in enumerate(intervals):
        for l2, r2 in intervals[a + 1:]:
            if l1 < l2 < r1 < r2 or l2 < l1 < r2 < r1:
                return False
    return True


def gold_spans(tree: DepTree, sent: Sentence | None = None) -> list[SubtreeSpan]:
    """Span of every token's subtree, root span ``(0, 0, n)`` first.

    Raises NonProjectiveError when some yield has a gap.
    """
    n = tree.n
    if sent is not None and sent.n != n:
        raise TreeIndexError(f"tree has {n} tokens, sentence has {sent.n}")
    spans = [root_span(n)]
    for i, ys in enumerate(tree.yields()[1:], 1):
        lo, hi = ys[0], ys[-1]
        if hi - lo + 1 != len(ys):
            raise NonProjectiveError(f"yield of token {i} is not contiguous")
        spans.append(SubtreeSpan(i, lo, hi))
    return spans


def gold_links(tree: DepTree) -> list[LabeledArc]:
    return tree.arcs()


def tree_from_arcs(arcs: Iterable[LabeledArc], n: int) -> DepTree:
    heads = [-1] * n
    labels = ["_"] * n
    for a in arcs:
        heads[a.child - 1] = a.parent
        labels[a.child - 1] = a.label
    return validate_tree(heads, labels, n)


def tree_from_spans(spans: Sequence[SubtreeSpan], labels: Sequence[str] | None = None) -> DepTree:
    """Recover heads from the per-token spans of a projective tree.

    The parent of token j is the root of the smallest other span that
    contains span j and does not have its root inside span j.
    """
    by_root = {sp.root: sp for sp in spans}
    n = by_root[0].end
    heads = []
    for j in range(1, n + 1):
        c = by_root[j]
        best = None
        for sp in spans:
            if sp.root == j or not sp.contains(c) or c.start <= sp.root <= c.end:
                continue
            if best is None or sp.length < best.length:
                best = sp
        heads.append(best.root)
    return validate_tree(heads, labels, n)
