"""Hashed feature templates for the log-linear scorer.

Every score head maps a grid of (row, cell) pairs to a fixed number of
hashed feature indices, so scores are ``w[idx].sum(-1)``. Hashing is
integer mixing over per-token codes (crc32 of form/POS), which keeps
everything vectorized and independent of Python's salted ``hash``.

Templates per head (T = answer token, R/S/E = query root/start/end,
I = span root, J = candidate boundary, pos/form of a token, L/R = its
left/right neighbour):

start   bucket(J-I) | pos I,J,bucket | pos I,posL J | pos I,J,posL J | pos J,posL J,side
        | form J,side | form I,bucket | pos I,posL J,pos J,bucket | pos I,posR I,bucket
        | pos I,posL I,bucket
end     mirror of start with right neighbours
parent_root   rel,bucket(T-R) | pos T,R,rel | pos T,R,bucket | form T,pos R,rel
        | pos T,posL S,posR E,rel | pos T,R,form R | pos T,R,rel,nearest | pos T,R,len(E-S)
parent_start  relS,bucket(T-S) | pos T,posL T,pos R,relS | pos T,R,bucket(T-S) | posL T,pos R,relS
        | pos T,posL T,posL S,relS | pos T,R,relS,nearest
parent_end    mirror of parent_start around E
child_root    relC,bucket(T-R) | pos T,R,relC | pos T,R,bucket | form T,pos R,relC
        | pos T,R,relC,nearest | pos T,posL T,posR T,pos R,relC | pos T,form R,relC
child_start   relC,bucket | pos T,posL T,pos R,relC | pos T,R,bucket | posL T,pos R,relC
        | pos T,posL T,relC,T==S
child_end     mirror of child_start around E
*_label       dir/bucket/POS/form conjunctions, each crossed with the label id
"""
from __future__ import annotations

import zlib

import numpy as np

from ..model import Sentence

TEMPLATE_VERSION = 1

_BOS = np.uint64(0x1F2E3D4C5B6A7988)
_EOS = np.uint64(0x0123456789ABCDEF)
_K1 = np.uint64(0xBF58476D1CE4E5B9)
_K2 = np.uint64(0x94D049BB133111EB)
_GOLD = 0x9E3779B97F4A7C15


def _code(s: str) -> int:
    return zlib.crc32(s.encode("utf-8")) | (len(s) << 32)


def _mix(acc, v):
    acc = (acc ^ v) * _K1
    return acc ^ (acc >> np.uint64(29))


def hash_features(template: int, *cols) -> np.ndarray:
    cols = np.broadcast_arrays(*[np.asarray(c, dtype=np.uint64) for c in cols])
    acc = np.full(cols[0].shape, np.uint64((template * _GOLD) & 0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    for c in cols:
        acc = _mix(acc, c)
    acc = (acc ^ (acc >> np.uint64(31))) * _K2
    return acc ^ (acc >> np.uint64(33))


def _bucket(d):
    d = np.asarray(d, dtype=np.int64)
    a = np.abs(d)
    b = np.where(a <= 5, a, np.where(a <= 10, 7, 11))
    return (np.sign(d) * b + 64).astype(np.uint64)


def _len_bucket(d):
    d = np.asarray(d, dtype=np.int64)
    return np.where(d <= 3, d, np.where(d <= 6, 5, np.where(d <= 12, 9, 13))).astype(np.uint64)


def _u(x):
    return np.asarray(x, dtype=np.uint64)


class SentenceCodes:
    """Per-token integer codes with boundary padding."""

    def __init__(self, sent: Sentence):
        n = sent.n
        self.n = n
        P = np.empty(n + 3, dtype=np.uint64)
        W = np.empty(n + 3, dtype=np.uint64)
        P[0] = W[0] = _BOS
        P[-1] = W[-1] = _EOS
        P[1:-1] = [_code(t.upos) for t in sent.tokens]
        W[1:-1] = [_code(t.form.lower()) for t in sent.tokens]
        self.P, self.W = P, W
        # nearest earlier/later token with the same POS (-1 / n+1 when none)
        prev_same = np.full(n + 1, -1, dtype=np.int64)
        next_same = np.full(n + 1, n + 1, dtype=np.int64)
        last = {}
        for i in range(n + 1):
            p = int(P[i + 1])
            if p in last:
                prev_same[i] = last[p]
                next_same[last[p]] = i
            last[p] = i
        self.prev_same, self.next_same = prev_same, next_same

    def pos(self, i):
        return self.P[np.asarray(i) + 1]

    def posL(self, i):
        return self.P[np.asarray(i)]

    def posR(self, i):
        return self.P[np.asarray(i) + 2]

    def form(self, i):
        return self.W[np.asarray(i) + 1]


def _stack(feats, mask):
    out = np.stack(np.broadcast_arrays(*feats), axis=-1)
    return (out & np.uint64(mask)).astype(np.int64)


def span_features(sc: SentenceCodes, kind: str, mask: int) -> np.ndarray:
    """Indices of shape (n, n, F): rows are span roots 1..n, cells candidate boundaries 1..n."""
    n = sc.n
    I = np.arange(1, n + 1)[:, None]
    J = np.arange(1, n + 1)[None, :]
    nb = sc.posL if kind == "start" else sc.posR
    base = 0 if kind == "start" else 16
    side = _u(J <= I) if kind == "start" else _u(J >= I)
    bk = _bucket(J - I)
    pI, pJ, nJ = sc.pos(I), sc.pos(J), nb(J)
    f = [
        hash_features(base + 0, bk),
        hash_features(base + 1, pI, pJ, bk),
        hash_features(base + 2, pI, nJ),
        hash_features(base + 3, pI, pJ, nJ),
        hash_features(base + 4, pJ, nJ, side),
        hash_features(base + 5, sc.form(J), side),
        hash_features(base + 6, sc.form(I), bk),
        hash_features(base + 7, pI, nJ, pJ, bk),
        hash_features(base + 8, pI, sc.posR(I), bk),
        hash_features(base + 9, pI, sc.posL(I), bk),
    ]
    return _stack(f, mask)


def _query_grid(n, spans):
    sp = np.asarray(spans, dtype=np.int64).reshape(-1, 3)
    R, S, E = (sp[:, k][:, None] for k in range(3))
    T = np.arange(n + 1)[None, :]
    return R, S, E, T


def _nearest_outside(sc, T, lo, hi):
    """1 if T is the closest token with its POS on its side of [lo, hi], else 0; 2 inside."""
    left = sc.next_same[T] >= lo
    right = sc.prev_same[T] <= hi
    return _u(np.where(T < lo, left, np.where(T > hi, right, 2)))


def parent_features(sc: SentenceCodes, spans, mask: int):
    """Indices for the parent-direction heads; ``spans`` are the child queries."""
    R, S, E, T = _query_grid(sc.n, spans)
    rel = _u(np.select([T < S - 1, T == S - 1, T <= E, T == E + 1], [0, 1, 2, 3], 4))
    near = _nearest_outside(sc, T, S, E)
    pT, pR = sc.pos(T), sc.pos(R)
    bk = _bucket(T - R)
    root = [
        hash_features(32, rel, bk),
        hash_features(33, pT, pR, rel),
        hash_features(34, pT, pR, bk),
        hash_features(35, sc.form(T), pR, rel),
        hash_features(36, pT, sc.posL(S), sc.posR(E), rel),
        hash_features(37, pT, pR, sc.form(R)),
        hash_features(38, pT, pR, rel, near),
        hash_features(39, pT, pR, _len_bucket(E - S)),
    ]
    out = {"parent_root": _stack(root, mask)}
    for kind, anchor, nb, base in (("start", S, sc.posL, 40), ("end", E, sc.posR, 48)):
        relA = _u(np.sign(T - anchor) + 1)
        nT = nb(T)
        f = [
            hash_features(base + 0, relA, _bucket(T - anchor)),
            hash_features(base + 1, pT, nT, pR, relA),
            hash_features(base + 2, pT, pR, _bucket(T - anchor)),
            hash_features(base + 3, nT, pR, relA),
            hash_features(base + 4, pT, nT, nb(anchor), relA),
            hash_features(base + 5, pT, pR, relA, near),
        ]
        out["parent_" + kind] = _stack(f, mask)
    return out


def child_features(sc: SentenceCodes, spans, mask: int):
    """Indices for the child-direction heads; ``spans`` are the parent queries."""
    R, S, E, T = _query_grid(sc.n, spans)
    rel = _u(np.select([T < S, T < R, T == R, T <= E], [0, 1, 2, 3], 4))
    near = _nearest_outside(sc, T, R, R)
    pT, pR = sc.pos(T), sc.pos(R)
    bk = _bucket(T - R)
    root = [
        hash_features(64, rel, bk),
        hash_features(65, pT, pR, rel),
        hash_features(66, pT, pR, bk),
        hash_features(67, sc.form(T), pR, rel),
        hash_features(68, pT, pR, rel, near),
        hash_features(69, pT, sc.posL(T), sc.posR(T), pR, rel),
        hash_features(70, pT, sc.form(R), rel),
    ]
    out = {"child_root": _stack(root, mask)}
    for kind, anchor, nb, base in (("start", S, sc.posL, 72), ("end", E, sc.posR, 80)):
        nT = nb(T)
        f = [
            hash_features(base + 0, rel, bk),
            hash_features(base + 1, pT, nT, pR, rel),
            hash_features(base + 2, pT, pR, bk),
            hash_features(base + 3, nT, pR, rel),
            hash_features(base + 4, pT, nT, rel, _u(T == anchor)),
        ]
        out["child_" + kind] = _stack(f, mask)
    return out


def _label_base(sc, dep, gov, salt):
    """Label conjunction features for a dependent token ``dep`` and governor token ``gov``."""
    d = _u(dep < gov)
    pd, pg = sc.pos(dep), sc.pos(gov)
    return [
        hash_features(salt + 0, pd, pg, d),
        hash_features(salt + 1, pd),
        hash_features(salt + 2, sc.form(dep), d),
        hash_features(salt + 3, pd, pg, d, _bucket(dep - gov)),
        hash_features(salt + 4, pg, sc.form(dep)),
    ]


def cross_labels(base: list, n_labels: int, mask: int) -> np.ndarray:
    """(..., F) base features crossed with labels -> (..., L, F) indices."""
    b = np.stack(np.broadcast_arrays(*base), axis=-1)[..., None, :]
    lab = np.arange(1, n_labels + 1, dtype=np.uint64).reshape((1,) * (b.ndim - 2) + (n_labels, 1))
    return (_mix(b, lab * np.uint64(0x2545F4914F6CDD1D)) & np.uint64(mask)).astype(np.int64)


def parent_label_features(sc, child_roots, parent_roots, n_labels, mask):
    """Label features for the child's query root and a candidate parent root."""
    return cross_labels(_label_base(sc, np.asarray(child_roots), np.asarray(parent_roots), 96), n_labels, mask)


def child_label_features(sc, parent_roots, child_roots, n_labels, mask):
    return cross_labels(_label_base(sc, np.asarray(child_roots), np.asarray(parent_roots), 104), n_labels, mask)
