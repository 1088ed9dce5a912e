"""Non-projective decoding: token edge scores from span pairs + Chu-Liu/Edmonds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import Infeasible
from ..linking import link_matrix
from ..model import DepTree, validate_tree
from ..proposal import CandidateSet
from ..scorer.tables import ScoreTables

NEG_INF = -np.inf


@dataclass
class EdgeMatrix:
    """``score[h, d]`` for every head/dependent token pair, with the winning span pair."""

    score: np.ndarray
    parent_span: np.ndarray  # candidate index of the head's span, -1 when infeasible
    child_span: np.ndarray
    label: np.ndarray  # label index of the winning pair
    spans: list


def edge_matrix(candidates: CandidateSet, tables: ScoreTables, lam: float = 1.0,
                span_weight: float = 1.0) -> EdgeMatrix:
    """Best span-pair score for each token pair; span scores enter once per incident
    edge, scaled by ``span_weight`` (1.0 counts them in full on every edge)."""
    n = tables.n
    spans = candidates.spans()
    sc = np.array([candidates.get(sp).score for sp in spans])
    L, labs = link_matrix(tables, spans)
    M = span_weight * (sc[:, None] + sc[None, :]) + lam * L
    roots = np.array([sp.root for sp in spans])
    score = np.full((n + 1, n + 1), NEG_INF)
    pa = np.full((n + 1, n + 1), -1, dtype=np.int64)
    ch = np.full((n + 1, n + 1), -1, dtype=np.int64)
    lab = np.zeros((n + 1, n + 1), dtype=np.int64)
    groups = [np.flatnonzero(roots == i) for i in range(n + 1)]
    for h in range(n + 1):
        gh = groups[h]
        if not len(gh):
            continue
        for d in range(1, n + 1):
            gd = groups[d]
            if d == h or not len(gd):
                continue
            block = M[np.ix_(gh, gd)]
            flat = int(np.argmax(block))
            i, j = divmod(flat, block.shape[1])
            score[h, d] = block[i, j]
            pa[h, d], ch[h, d] = gh[i], gd[j]
            lab[h, d] = labs[gh[i], gd[j]]
    return EdgeMatrix(score, pa, ch, lab, spans)


def _find_cycle(heads: np.ndarray) -> Optional[list]:
    n = len(heads)
    color = [0] * n
    color[0] = 2
    for v in range(1, n):
        path = []
        u = v
        while color[u] == 0:
            color[u] = 1
            path.append(u)
            u = heads[u]
        if color[u] == 1:
            return path[path.index(u):]
        for p in path:
            color[p] = 2
    return None


def chu_liu_edmonds(scores: np.ndarray) -> np.ndarray:
    """Maximum spanning arborescence rooted at 0 of ``scores[h, d]``.

    Returns heads with ``heads[0] == -1``. Ties go to the lower head index.
    """
    S = np.array(scores, dtype=float)
    m = S.shape[0]
    np.fill_diagonal(S, NEG_INF)
    S[:, 0] = NEG_INF
    heads = np.argmax(S, axis=0)
    heads[0] = -1
    cycle = _find_cycle(heads)
    if cycle is None:
        return heads
    in_cycle = np.zeros(m, dtype=bool)
    in_cycle[cycle] = True
    rest = np.flatnonzero(~in_cycle)  # includes 0
    c = len(rest)
    cyc = np.array(cycle)
    S2 = np.full((c + 1, c + 1), NEG_INF)
    S2[:c, :c] = S[np.ix_(rest, rest)]
    # entering the cycle at v replaces v's cycle edge
    gain = S[np.ix_(rest, cyc)] - S[heads[cyc], cyc][None, :]
    enter = np.argmax(gain, axis=1)
    S2[:c, c] = gain[np.arange(c), enter]
    leave_blk = S[np.ix_(cyc, rest)]
    leave = np.argmax(leave_blk, axis=0)
    S2[c, :c] = leave_blk[leave, np.arange(c)]
    sub = chu_liu_edmonds(S2)
    out = heads.copy()
    for k, v in enumerate(rest):
        if v == 0:
            continue
        h = sub[k]
        out[v] = cyc[leave[k]] if h == c else rest[h]
    u = sub[c]
    out[cyc[enter[u]]] = rest[u]
    return out


def tree_score(scores: np.ndarray, heads: np.ndarray) -> float:
    d = np.arange(1, len(heads))
    return float(scores[heads[1:], d].sum())


def max_arborescence_single_root(scores: np.ndarray) -> np.ndarray:
    """Best arborescence with exactly one dependent of token 0."""
    heads = chu_liu_edmonds(scores)
    if np.count_nonzero(heads[1:] == 0) <= 1:
        return heads
    best, best_heads = NEG_INF, None
    for j in range(1, scores.shape[0]):
        if not np.isfinite(scores[0, j]):
            continue
        S = np.array(scores, dtype=float)
        S[0, :] = NEG_INF
        S[0, j] = scores[0, j]
        h = chu_liu_edmonds(S)
        v = tree_score(scores, h)
        if v > best:
            best, best_heads = v, h
    if best_heads is None:
        raise Infeasible("no single-root arborescence")
    return best_heads


def decode_mst(candidates: CandidateSet, tables: ScoreTables, lam: float = 1.0,
               span_weight: float = 1.0):
    """Best (possibly non-projective) single-root tree under span-pair edge scores.

    Returns ``(tree, score)``; score is the sum of the chosen edge scores.
    """
    em = edge_matrix(candidates, tables, lam, span_weight)
    n = tables.n
    for d in range(1, n + 1):
        if not np.isfinite(em.score[:, d]).any():
            raise Infeasible(f"token {d} has no candidate span pair linking it to a head")
    heads = max_arborescence_single_root(em.score)
    total = tree_score(em.score, heads)
    if not np.isfinite(total):
        raise Infeasible("no finite-scoring arborescence")
    labels = [tables.labels[em.label[heads[d], d]] for d in range(1, n + 1)]
    return validate_tree(heads[1:].tolist(), labels, n), total
