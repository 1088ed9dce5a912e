"""Pure-Python chart kernel (fallback for the compiled ``_chart`` module)."""
import math

import numpy as np

NEG_INF = -math.inf


def fill_chart(order, roots, starts, ends, span_scores, link, lam, starts_ptr, starts_items, n):
    """Best subtree score of every candidate span, shortest spans first.

    A span (r, s, e) scores its own span score plus the best tiling of
    [s, r-1] and of [r+1, e] by adjacent candidate spans b, each tile
    contributing best[b] + lam * link[a, b]. ``back[a, p]`` is the tile
    that ends at p-1 in the best tiling for span a.

    ``order`` holds candidate indices sorted by length; candidates grouped
    by start position are ``starts_items[starts_ptr[p]:starts_ptr[p+1]]``.
    """
    Q = len(roots)
    best = np.full(Q, NEG_INF)
    back = np.full((Q, n + 2), -1, dtype=np.int64)
    roots = roots.tolist()
    starts = starts.tolist()
    ends = ends.tolist()
    sscore = span_scores.tolist()
    ptr = starts_ptr.tolist()
    items = starts_items.tolist()
    bestl = [NEG_INF] * Q
    f = [NEG_INF] * (n + 2)
    for a in order.tolist():
        r, s, e = roots[a], starts[a], ends[a]
        row = link[a]
        back_a = back[a]
        total = sscore[a]
        for lo, hi in ((s, r - 1), (r + 1, e)):
            if lo > hi:
                continue
            for p in range(lo, hi + 2):
                f[p] = NEG_INF
            f[lo] = 0.0
            for p in range(lo, hi + 1):
                fp = f[p]
                if fp == NEG_INF:
                    continue
                for t in range(ptr[p], ptr[p + 1]):
                    b = items[t]
                    eb = ends[b]
                    if eb > hi:
                        continue
                    vb = bestl[b]
                    if vb == NEG_INF:
                        continue
                    v = fp + vb + lam * row[b]
                    if v > f[eb + 1]:
                        f[eb + 1] = v
                        back_a[eb + 1] = b
            total += f[hi + 1]
            if total == NEG_INF:
                break
        bestl[a] = total
    best[:] = bestl
    return best, back
