"""Top-k subtree span proposal from separable start/end scores."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

from .model import Sentence, SubtreeSpan, root_span
from .scorer.tables import ScoreTables

DEFAULT_K = 15
PROPOSED = "proposed"
RETRIEVED = "retrieved"


class Candidate(NamedTuple):
    span: SubtreeSpan
    score: float
    provenance: str = PROPOSED


def span_score(tables: ScoreTables, span) -> float:
    r, s, e = span
    return float(tables.start[r, s] + tables.end[r, e])


def _tie_key(c: Candidate):
    return (-c.score, c.span.end - c.span.start, c.span.start)


@dataclass
class CandidateSet:
    """Candidate subtree spans grouped by root token, best first."""

    n: int
    by_root: list[list[Candidate]] = field(default_factory=list)
    k: Optional[int] = None

    def __post_init__(self):
        if not self.by_root:
            self.by_root = [[] for _ in range(self.n + 1)]
        self._seen = {c.span: c for cs in self.by_root for c in cs}

    def __len__(self):
        return len(self._seen)

    def __contains__(self, span):
        return tuple(span) in self._seen

    def __iter__(self) -> Iterator[Candidate]:
        for cs in self.by_root:
            yield from cs

    def spans(self) -> list[SubtreeSpan]:
        return [c.span for c in self]

    def span_set(self) -> set:
        return set(self._seen)

    def get(self, span) -> Optional[Candidate]:
        return self._seen.get(tuple(span))

    def add(self, cand: Candidate) -> bool:
        """Insert unless the span is already present (an existing entry keeps its provenance)."""
        if cand.span in self._seen:
            return False
        self._seen[cand.span] = cand
        row = self.by_root[cand.span.root]
        row.append(cand)
        row.sort(key=_tie_key)
        return True

    def copy(self) -> "CandidateSet":
        return CandidateSet(self.n, [list(cs) for cs in self.by_root], self.k)

    def count(self, provenance: str) -> int:
        return sum(c.provenance == provenance for c in self)

    @classmethod
    def from_spans(cls, tables: ScoreTables, spans: Iterable, provenance=PROPOSED) -> "CandidateSet":
        cs = cls(tables.n)
        cs.add(Candidate(root_span(tables.n), 0.0, provenance))
        for sp in spans:
            sp = SubtreeSpan(*sp)
            cs.add(Candidate(sp, span_score(tables, sp), provenance))
        return cs


def all_spans(n: int, include_root: bool = True) -> list[SubtreeSpan]:
    out = [root_span(n)] if include_root else []
    for r in range(1, n + 1):
        for s in range(1, r + 1):
            for e in range(r, n + 1):
                out.append(SubtreeSpan(r, s, e))
    return out


def top_k_spans(start_row: np.ndarray, end_row: np.ndarray, root: int, n: int, k: int) -> list[Candidate]:
    """The k best (root, s, e) with s <= root <= e by start_row[s] + end_row[e].

    Walks the grid of (start, end) choices sorted by their separate scores
    with a heap, so only O(k) cells are visited. Equal scores are ordered
    by span length then start.
    """
    starts = np.arange(1, root + 1)
    ends = np.arange(root, n + 1)
    a = start_row[starts]
    b = end_row[ends]
    total = len(starts) * len(ends)
    if k >= total:
        cells = [(float(a[p] + b[q]), int(starts[p]), int(ends[q])) for p in range(len(starts)) for q in range(len(ends))]
    else:
        oa = np.argsort(-a, kind="stable")
        ob = np.argsort(-b, kind="stable")
        sa, sb = a[oa], b[ob]
        heap = [(-(sa[0] + sb[0]), 0, 0)]
        visited = {(0, 0)}
        cells = []
        kth = None
        while heap:
            neg, p, q = heap[0]
            if kth is not None and -neg < kth:
                break
            heapq.heappop(heap)
            cells.append((-neg, int(starts[oa[p]]), int(ends[ob[q]])))
            if len(cells) == k:
                kth = -neg
            for pp, qq in ((p + 1, q), (p, q + 1)):
                if pp < len(sa) and qq < len(sb) and (pp, qq) not in visited:
                    visited.add((pp, qq))
                    heapq.heappush(heap, (-(sa[pp] + sb[qq]), pp, qq))
    cands = [Candidate(SubtreeSpan(root, s, e), float(sc)) for sc, s, e in cells]
    cands.sort(key=_tie_key)
    return cands[:k]


def propose(tables: ScoreTables, sent: Optional[Sentence], k: int = DEFAULT_K) -> CandidateSet:
    """Top-k spans per real token plus the forced root span."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = tables.n
    if sent is not None and sent.n != n:
        raise ValueError(f"tables for n={n}, sentence has n={sent.n}")
    cs = CandidateSet(n, k=k)
    cs.add(Candidate(root_span(n), 0.0))
    for i in range(1, n + 1):
        for c in top_k_spans(tables.start[i], tables.end[i], i, n, k):
            cs.add(c)
    return cs
