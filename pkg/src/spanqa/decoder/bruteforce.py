"""Exhaustive decoders over all trees of small sentences (test oracles).

Scores are assembled from the scalar ``span_score`` / ``score_link``
functions, not from the matrices the fast decoders use.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from ..errors import Infeasible, TooLarge
from ..linking import best_label, score_link
from ..model import DepTree, SubtreeSpan, is_projective, validate_tree
from ..proposal import CandidateSet, span_score
from ..scorer.tables import ScoreTables

MAX_PROJECTIVE_N = 10
MAX_ALL_N = 7


@lru_cache(maxsize=None)
def _tilings(s: int, e: int) -> tuple:
    """Every way to cover [s, e] with adjacent projective subtrees: tuples of (root, heads-dict items)."""
    if s > e:
        return ((),)
    out = []
    for m in range(s, e + 1):
        for first in _subtrees(s, m):
            for rest in _tilings(m + 1, e):
                out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _subtrees(s: int, e: int) -> tuple:
    """Projective subtrees spanning exactly [s, e] as (root, ((dep, head), ...))."""
    out = []
    for r in range(s, e + 1):
        for left in _tilings(s, r - 1):
            for right in _tilings(r + 1, e):
                arcs = []
                for root, sub in left + right:
                    arcs.append((root, r))
                    arcs.extend(sub)
                out.append((r, tuple(arcs)))
    return tuple(out)


@lru_cache(maxsize=None)
def projective_head_vectors(n: int) -> np.ndarray:
    """All single-root projective trees over n tokens, lexicographically sorted (T, n)."""
    rows = []
    for root, arcs in _subtrees(1, n):
        heads = [0] * n
        for dep, head in arcs:
            heads[dep - 1] = head
        heads[root - 1] = 0
        rows.append(heads)
    rows.sort()
    return np.array(rows, dtype=np.int64).reshape(-1, n)


@lru_cache(maxsize=None)
def all_head_vectors(n: int) -> np.ndarray:
    """All single-root trees (projective or not) over n tokens, lexicographically sorted."""
    rows = []
    for heads in itertools.product(range(n + 1), repeat=n):
        if heads.count(0) != 1 or any(h == i for i, h in enumerate(heads, 1)):
            continue
        ok = True
        for i in range(1, n + 1):
            seen = 0
            j = i
            while j != 0 and seen <= n:
                j = heads[j - 1]
                seen += 1
            if j != 0:
                ok = False
                break
        if ok:
            rows.append(heads)
    return np.array(rows, dtype=np.int64).reshape(-1, n)


def _spans_of(heads, n):
    """Per-token (min, max) of the yield, via explicit descendant enumeration."""
    kids = [[] for _ in range(n + 1)]
    for d, h in enumerate(heads, 1):
        kids[h].append(d)
    spans = [SubtreeSpan(0, 0, n)]
    for i in range(1, n + 1):
        stack, seen = [i], []
        while stack:
            u = stack.pop()
            seen.append(u)
            stack.extend(kids[u])
        spans.append(SubtreeSpan(i, min(seen), max(seen)))
    return spans


def tree_score_projective(heads, candidates: CandidateSet, tables: ScoreTables, lam: float, memo=None):
    """Span+link score of a projective tree, or None if a span is not a candidate."""
    n = tables.n
    spans = _spans_of(heads, n)
    if any(sp not in candidates for sp in spans):
        return None
    memo = {} if memo is None else memo
    total = 0.0
    for d in range(1, n + 1):
        total += span_score(tables, spans[d])
    for d, h in enumerate(heads, 1):
        key = (spans[h], spans[d])
        if key not in memo:
            memo[key] = score_link(tables, spans[h], spans[d])
        total += lam * memo[key]
    return total


def edge_scores_scalar(candidates: CandidateSet, tables: ScoreTables, lam: float, span_weight: float = 1.0):
    """score[h, d] = max over candidate spans rooted at h and d, by scalar loops."""
    n = tables.n
    by_root = [[c for c in candidates if c.span.root == i] for i in range(n + 1)]
    score = np.full((n + 1, n + 1), -np.inf)
    arg = {}
    for h in range(n + 1):
        for d in range(1, n + 1):
            if h == d:
                continue
            for a in by_root[h]:
                for b in by_root[d]:
                    v = span_weight * (a.score + b.score) + lam * score_link(tables, a.span, b.span, check=False)
                    if v > score[h, d]:
                        score[h, d] = v
                        arg[h, d] = (a.span, b.span)
    return score, arg


def decode_bruteforce(candidates: CandidateSet, tables: ScoreTables, lam: float = 1.0,
                      mode: str = "projective", span_weight: float = 1.0):
    """Exhaustive maximum. ``mode='projective'`` scores trees by spans and links;
    ``mode='all'`` scores every tree by summed edge scores. Among equal scores the
    lexicographically smallest head vector wins."""
    n = tables.n
    if mode == "projective":
        if n > MAX_PROJECTIVE_N:
            raise TooLarge(f"n={n} exceeds {MAX_PROJECTIVE_N} for projective enumeration")
        best, best_heads, memo = -np.inf, None, {}
        for heads in projective_head_vectors(n):
            v = tree_score_projective(heads.tolist(), candidates, tables, lam, memo)
            if v is not None and v > best:
                best, best_heads = v, heads.tolist()
        if best_heads is None:
            raise Infeasible("no projective tree uses only candidate spans")
        spans = _spans_of(best_heads, n)
        labels = [best_label(tables, spans[h], spans[d]) for d, h in enumerate(best_heads, 1)]
        return validate_tree(best_heads, labels, n), float(best)
    if mode == "all":
        if n > MAX_ALL_N:
            raise TooLarge(f"n={n} exceeds {MAX_ALL_N} for exhaustive enumeration")
        score, arg = edge_scores_scalar(candidates, tables, lam, span_weight)
        trees = all_head_vectors(n)
        totals = score[trees, np.arange(1, n + 1)[None, :]].sum(axis=1)
        if not np.isfinite(totals).any():
            raise Infeasible("no tree with finite edge scores")
        i = int(np.argmax(totals))
        heads = trees[i].tolist()
        labels = [best_label(tables, *arg[h, d]) for d, h in enumerate(heads, 1)]
        return validate_tree(heads, labels, n), float(totals[i])
    raise ValueError(f"mode must be 'projective' or 'all', not {mode!r}")
