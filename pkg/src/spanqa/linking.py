"""Parent/child link scores between subtree spans and parent-span retrieval."""
from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from .errors import ContainmentError, InvalidSpanError
from .model import SubtreeSpan
from .proposal import RETRIEVED, Candidate, CandidateSet, span_score
from .scorer.tables import ScoreTables


def check_link(parent, child, n: int) -> None:
    """Raise unless ``child`` can be a direct subtree of ``parent``."""
    parent, child = SubtreeSpan(*parent), SubtreeSpan(*child)
    for sp in (parent, child):
        if not sp.is_valid(n):
            raise InvalidSpanError(f"invalid span {tuple(sp)} for n={n}")
    if child.root == 0:
        raise ContainmentError("the root span cannot be a child")
    if not parent.contains(child):
        raise ContainmentError(f"{tuple(child)} not contained in {tuple(parent)}")
    if child.start <= parent.root <= child.end:
        raise ContainmentError(f"parent root {parent.root} lies inside child span {tuple(child)}")


def _label_index(tables: ScoreTables, label) -> Optional[int]:
    if label is None or isinstance(label, (int, np.integer)):
        return label
    try:
        return tables.labels.index(label)
    except ValueError:
        return tables.labels.index("<unk>") if "<unk>" in tables.labels else None


def score_parent(tables: ScoreTables, parent, query_child, label=None, check: bool = True) -> float:
    """Root + start + end + label log-scores of ``parent`` answering the child query.

    With ``label=None`` the best label is used.
    """
    parent, child = SubtreeSpan(*parent), SubtreeSpan(*query_child)
    if check:
        check_link(parent, child, tables.n)
    root, start, end, lab = tables.link_rows(child, "parent")
    li = _label_index(tables, label)
    lab_score = lab[parent.root].max() if li is None else lab[parent.root, li]
    return float(root[parent.root] + start[parent.start] + end[parent.end] + lab_score)


def score_child(tables: ScoreTables, child, query_parent, label=None, check: bool = True) -> float:
    """Root + start + end log-scores of ``child`` answering the parent query.

    The child-direction label head only takes part in training, so
    ``label`` is accepted for symmetry and ignored.
    """
    parent, child = SubtreeSpan(*query_parent), SubtreeSpan(*child)
    if check:
        check_link(parent, child, tables.n)
    root, start, end, _ = tables.link_rows(parent, "child")
    return float(root[child.root] + start[child.start] + end[child.end])


def score_link(tables: ScoreTables, parent, child, label=None, check: bool = True) -> float:
    return (score_parent(tables, parent, child, label, check)
            + score_child(tables, child, parent, label, check))


def best_label(tables: ScoreTables, parent, child) -> str:
    _, _, _, lab = tables.link_rows(SubtreeSpan(*child), "parent")
    return tables.labels[int(np.argmax(lab[parent[0]]))]


def link_matrix(tables: ScoreTables, spans: Sequence[SubtreeSpan]):
    """Link scores for every ordered pair of ``spans``.

    Returns ``(L, lab)`` where ``L[a, b]`` scores span a as the parent of
    span b (best label) and ``lab[a, b]`` is that label's index. No
    containment filtering happens here.
    """
    spans = np.asarray(spans, dtype=np.int64).reshape(-1, 3)
    q = tables.rows([SubtreeSpan(*sp) for sp in spans])
    r, s, e = spans[:, 0], spans[:, 1], spans[:, 2]
    # parent direction: rows indexed by the child (b), columns by the parent's tokens
    pr = tables.parent_root[q][:, r]  # [b, a]
    ps = tables.parent_start[q][:, s]
    pe = tables.parent_end[q][:, e]
    labs = tables.label[q][:, r, :]  # [b, a, L]
    lab_best = labs.argmax(axis=2)
    lab_score = labs.max(axis=2)
    parent_part = (pr + ps + pe + lab_score).T  # [a, b]
    cr = tables.child_root[q][:, r]  # [a, b]
    cs = tables.child_start[q][:, s]
    ce = tables.child_end[q][:, e]
    return parent_part + cr + cs + ce, lab_best.T


def retrieve_parent_span(tables: ScoreTables, query) -> Optional[SubtreeSpan]:
    """Exact argmax of score_parent over all spans that can contain ``query``.

    For a parent root t the best start lies in [1, min(t, s)] and the best end
    in [max(t, e), n]; prefix/suffix maxima make the search O(n). Ties go to
    the smaller root, then the smaller start, then the smaller end.
    """
    r, s, e = query
    n = tables.n
    if r == 0:
        return None
    root, start, end, lab = tables.link_rows(SubtreeSpan(r, s, e), "parent")
    lab_best = lab.max(axis=1)
    # best_start[j] = argmax of start[1..j]; best_end[j] = argmax of end[j..n]
    best_start = np.zeros(n + 1, dtype=np.int64)
    best_end = np.zeros(n + 2, dtype=np.int64)
    for j in range(1, n + 1):
        best_start[j] = j if j == 1 or start[j] > start[best_start[j - 1]] else best_start[j - 1]
    best_end[n] = n
    for j in range(n - 1, 0, -1):
        best_end[j] = j if end[j] >= end[best_end[j + 1]] else best_end[j + 1]
    best, arg = root[0] + start[0] + end[n] + lab_best[0], SubtreeSpan(0, 0, n)
    for t in range(1, n + 1):
        if s <= t <= e:
            continue
        st = int(best_start[min(t, s)])
        en = int(best_end[max(t, e)])
        v = root[t] + start[st] + end[en] + lab_best[t]
        if v > best:
            best, arg = v, SubtreeSpan(t, st, en)
    return arg


def retrieve_parents(tables: ScoreTables, candidates: CandidateSet) -> CandidateSet:
    """Add, for every proposed span, its best-scoring parent span."""
    out = candidates.copy()
    proposed = [c.span for c in candidates if c.provenance != RETRIEVED and c.span.root != 0]
    tables.ensure(proposed)
    for sp in proposed:
        par = retrieve_parent_span(tables, sp)
        if par is not None and par not in out:
            out.add(Candidate(par, span_score(tables, par), RETRIEVED))
    return out
