"""Projective decoding: bottom-up chart over candidate spans."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import Infeasible
from ..linking import link_matrix
from ..model import DepTree, SubtreeSpan, root_span, validate_tree
from ..proposal import CandidateSet
from ..scorer.tables import ScoreTables
from . import kernels


@dataclass
class Chart:
    """Best score per candidate span with tiling backpointers.

    ``spans[best_child]`` is the root's single child; ``back[a, p]`` is the
    candidate whose tile ends at token p-1 inside span a.
    """

    spans: list
    best: np.ndarray
    back: np.ndarray
    root_score: float
    root_child: int
    link: np.ndarray
    labels: np.ndarray

    def score_of(self, span) -> float:
        return float(self.best[self.spans.index(tuple(span))])


def _arrays(candidates: CandidateSet):
    spans = [c.span for c in candidates if c.span.root != 0]
    arr = np.asarray(spans, dtype=np.int64).reshape(-1, 3)
    sscore = np.array([candidates.get(sp).score for sp in spans], dtype=float)
    return spans, arr, sscore


def kernel_inputs(candidates: CandidateSet, tables: ScoreTables, lam: float = 1.0):
    """Real spans, the full link matrix (row/col 0 = root span) and the kernel's arguments."""
    n = tables.n
    if root_span(n) not in candidates:
        raise ValueError("candidate set lacks the root span")
    spans, arr, sscore = _arrays(candidates)
    L, labs = link_matrix(tables, [root_span(n)] + spans)
    inner = np.ascontiguousarray(L[1:, 1:])
    roots, starts, ends = (np.ascontiguousarray(arr[:, k]) for k in range(3))
    order = np.lexsort((roots, ends - starts)).astype(np.int64)  # by length
    by_start = np.lexsort((roots, ends, starts)).astype(np.int64)
    ptr = np.searchsorted(starts[by_start], np.arange(n + 2)).astype(np.int64)
    args = (order, roots, starts, ends, sscore, inner, float(lam), ptr, by_start, n)
    return spans, L, labs, args


def build_chart(candidates: CandidateSet, tables: ScoreTables, lam: float = 1.0, kernel=None) -> Chart:
    n = tables.n
    spans, L, labs, args = kernel_inputs(candidates, tables, lam)
    starts, ends = args[2], args[3]
    fill = kernel or kernels.fill_chart
    best, back = fill(*args)

    root_score, root_child = -np.inf, -1
    for b in np.flatnonzero((starts == 1) & (ends == n)):
        v = best[b] + lam * L[0, b + 1]
        if v > root_score:
            root_score, root_child = float(v), int(b)
    return Chart(spans, best, back, root_score, root_child, L, labs)


def extract_tree(chart: Chart, tables: ScoreTables) -> DepTree:
    n = tables.n
    heads = [-1] * n
    labels = ["_"] * n
    names = tables.labels

    def attach(parent_idx, child_idx):
        # link/labels matrices are offset by one (row 0 is the root span)
        child = chart.spans[child_idx]
        heads[child.root - 1] = 0 if parent_idx < 0 else chart.spans[parent_idx].root
        labels[child.root - 1] = names[int(chart.labels[parent_idx + 1, child_idx + 1])]

    attach(-1, chart.root_child)
    stack = [chart.root_child]
    while stack:
        a = stack.pop()
        r, s, e = chart.spans[a]
        for lo, hi in ((s, r - 1), (r + 1, e)):
            p = hi + 1
            while p > lo:
                b = int(chart.back[a, p])
                attach(a, b)
                stack.append(b)
                p = chart.spans[b].start
    return validate_tree(heads, labels, n)


def decode_projective(candidates: CandidateSet, tables: ScoreTables, lam: float = 1.0, kernel=None):
    """Highest-scoring projective tree built only from candidate spans.

    Returns ``(tree, score)`` with score = sum of span scores + lam * sum of
    link scores. Raises Infeasible when the candidates cannot tile the sentence.
    """
    chart = build_chart(candidates, tables, lam, kernel)
    if chart.root_child < 0 or not np.isfinite(chart.root_score):
        raise Infeasible("candidate spans admit no projective tree; try a larger k")
    return extract_tree(chart, tables), chart.root_score
