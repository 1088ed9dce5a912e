"""Dense per-sentence score tables and their text file format.

Every row is a log-distribution. Span rows (``start``/``end``) are indexed
by token on both axes; real tokens only ever start/end on real tokens, so
column 0 of rows 1..n holds ``-inf``, and the root row puts all its mass on
``(0, n)``. Link rows are keyed by a query span and range over the full
context ``0..n``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..errors import DimensionError, FormatError, MissingQueryError
from ..model import Sentence, SubtreeSpan

HEADER = "SPANQA-TABLES v1"
LINK_FIELDS = ("parent_root", "parent_start", "parent_end", "child_root", "child_start", "child_end")

MARKERS = ("<sos>", "<sor>", "<eor>", "<eos>")


@dataclass(frozen=True)
class QueryEncoding:
    """The sentence with span/root markers wrapped around a query span."""

    tokens: tuple[str, ...]
    span: SubtreeSpan

    @classmethod
    def encode(cls, sent: Sentence, span: SubtreeSpan) -> "QueryEncoding":
        r, s, e = span
        forms = sent.forms
        toks = forms[:s] + ["<sos>"] + forms[s:r] + ["<sor>", forms[r], "<eor>"]
        toks += forms[r + 1:e + 1] + ["<eos>"] + forms[e + 1:]
        return cls(tuple(toks), span)

    def marker_positions(self) -> dict[str, int]:
        r, s, e = self.span
        return dict(zip(MARKERS, (s, r + 1, r + 3, e + 4)))

    def strip(self) -> list[str]:
        """Drop the four markers (by position, so forms that look like markers survive)."""
        pos = set(self.marker_positions().values())
        return [t for i, t in enumerate(self.tokens) if i not in pos]


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    z = x - m
    with np.errstate(divide="ignore"):
        return z - np.log(np.sum(np.exp(z), axis=axis, keepdims=True))


def logsumexp(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(x - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out


def span_table_from_raw(raw: np.ndarray, kind: str = "start") -> np.ndarray:
    """Normalize an ``n x n`` raw score block (rows/cols = tokens 1..n) into the
    ``(n+1) x (n+1)`` log table layout."""
    n = raw.shape[0]
    out = np.full((n + 1, n + 1), -np.inf)
    out[0] = _root_rows(n)[0] if kind == "start" else _root_rows(n)[1]
    out[1:, 1:] = log_softmax(np.asarray(raw, dtype=float), axis=1)
    return out


def _root_rows(n):
    start0 = np.full(n + 1, -np.inf)
    start0[0] = 0.0
    end0 = np.full(n + 1, -np.inf)
    end0[n] = 0.0
    return start0, end0


# provider(spans) -> dict with LINK_FIELDS arrays of shape (len(spans), n+1) and "label" (len, n+1, L)
LinkProvider = Callable[[Sequence[SubtreeSpan]], dict]


@dataclass
class ScoreTables:
    n: int
    labels: tuple[str, ...]
    start: np.ndarray
    end: np.ndarray
    queries: list[SubtreeSpan] = field(default_factory=list)
    parent_root: np.ndarray = None
    parent_start: np.ndarray = None
    parent_end: np.ndarray = None
    child_root: np.ndarray = None
    child_start: np.ndarray = None
    child_end: np.ndarray = None
    label: np.ndarray = None
    provider: Optional[LinkProvider] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n, L = self.n, len(self.labels)
        for name in ("start", "end"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n + 1, n + 1):
                raise DimensionError(f"{name} table has shape {arr.shape}, expected {(n + 1, n + 1)}")
            setattr(self, name, arr)
        q = len(self.queries)
        for name in LINK_FIELDS:
            arr = getattr(self, name)
            arr = np.zeros((0, n + 1)) if arr is None else np.asarray(arr, dtype=float)
            if arr.shape != (q, n + 1):
                raise DimensionError(f"{name} table has shape {arr.shape}, expected {(q, n + 1)}")
            setattr(self, name, arr)
        lab = np.zeros((0, n + 1, L)) if self.label is None else np.asarray(self.label, dtype=float)
        if lab.shape != (q, n + 1, L):
            raise DimensionError(f"label table has shape {lab.shape}, expected {(q, n + 1, L)}")
        self.label = lab
        self.queries = [SubtreeSpan(*sp) for sp in self.queries]
        self._index = {sp: i for i, sp in enumerate(self.queries)}
        if len(self._index) != len(self.queries):
            raise DimensionError("duplicate query spans")

    @classmethod
    def from_raw(cls, raw_start, raw_end, labels, queries=(), raw_links=None, provider=None):
        """Build tables from unnormalized scores; link rows are log-softmaxed over the context."""
        raw_start = np.asarray(raw_start, dtype=float)
        n = raw_start.shape[0]
        kw = {}
        if raw_links is not None:
            for name in LINK_FIELDS:
                kw[name] = log_softmax(np.asarray(raw_links[name], dtype=float), axis=1)
            kw["label"] = log_softmax(np.asarray(raw_links["label"], dtype=float), axis=2)
        return cls(n, tuple(labels), span_table_from_raw(raw_start, "start"), span_table_from_raw(raw_end, "end"),
                   list(queries), provider=provider, **kw)

    # -- span rows

    def start_row(self, i: int) -> np.ndarray:
        return self.start[i]

    def end_row(self, i: int) -> np.ndarray:
        return self.end[i]

    # -- link rows

    def has_query(self, span) -> bool:
        return tuple(span) in self._index

    def query_index(self, span) -> int:
        try:
            return self._index[tuple(span)]
        except KeyError:
            raise MissingQueryError(f"no link rows for query span {tuple(span)}") from None

    def ensure(self, spans: Iterable[SubtreeSpan]) -> None:
        """Compute link rows for any spans not yet present (needs a provider)."""
        missing = []
        seen = set()
        for sp in spans:
            sp = SubtreeSpan(*sp)
            if sp not in self._index and sp not in seen:
                seen.add(sp)
                missing.append(sp)
        if not missing:
            return
        if self.provider is None:
            raise MissingQueryError(f"no link rows for {len(missing)} spans, e.g. {tuple(missing[0])}")
        rows = self.provider(missing)
        for name in LINK_FIELDS:
            setattr(self, name, np.concatenate([getattr(self, name), rows[name]], axis=0))
        self.label = np.concatenate([self.label, rows["label"]], axis=0)
        for sp in missing:
            self._index[sp] = len(self.queries)
            self.queries.append(sp)

    def link_rows(self, query, direction: str = "parent"):
        """(root row, start row, end row, label block or None) for a query span."""
        self.ensure([query])
        q = self.query_index(query)
        if direction == "parent":
            return self.parent_root[q], self.parent_start[q], self.parent_end[q], self.label[q]
        if direction == "child":
            return self.child_root[q], self.child_start[q], self.child_end[q], None
        raise ValueError(f"direction must be 'parent' or 'child', not {direction!r}")

    def rows(self, spans: Sequence[SubtreeSpan]) -> np.ndarray:
        self.ensure(spans)
        return np.array([self.query_index(sp) for sp in spans], dtype=np.int64)

    def check_normalized(self, atol: float = 1e-6) -> float:
        """Largest deviation of any row's log-sum-exp from 0."""
        dev = 0.0
        for arr in (self.start, self.end):
            dev = max(dev, float(np.max(np.abs(logsumexp(arr, axis=1)))))
        for name in LINK_FIELDS:
            arr = getattr(self, name)
            if len(arr):
                dev = max(dev, float(np.max(np.abs(logsumexp(arr, axis=1)))))
        if len(self.label):
            dev = max(dev, float(np.max(np.abs(logsumexp(self.label, axis=2)))))
        return dev

    def same_values(self, other: "ScoreTables") -> bool:
        if (self.n, self.labels, self.queries) != (other.n, other.labels, other.queries):
            return False
        names = ("start", "end") + LINK_FIELDS + ("label",)
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in names)


# -- file format


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise FormatError(f"refusing to write non-finite value {x!r}")
    return repr(x)


def _write_block(out, name, arr2d, dims):
    out.append(f"table {name} " + " ".join(str(d) for d in dims))
    for row in arr2d:
        out.append(" ".join(_fmt(v) for v in row))


def format_tables(tables: ScoreTables) -> list[str]:
    t = tables
    n, q, L = t.n, len(t.queries), len(t.labels)
    out = [f"record n {n} queries {q} labels {L}"]
    out.append("\t".join(("labels",) + t.labels))
    for sp in t.queries:
        out.append(f"query {sp.root} {sp.start} {sp.end}")
    _write_block(out, "start", t.start[1:, 1:], (n, n))
    _write_block(out, "end", t.end[1:, 1:], (n, n))
    for name in LINK_FIELDS:
        _write_block(out, name, getattr(t, name), (q, n + 1))
    _write_block(out, "label", t.label.reshape(q * (n + 1), L), (q, n + 1, L))
    out.append("end")
    return out


def save_tables(tables, path) -> None:
    """Write one ScoreTables (or a list of them) to ``path``."""
    items = [tables] if isinstance(tables, ScoreTables) else list(tables)
    lines = [HEADER, f"records {len(items)}"]
    for t in items:
        lines.extend(format_tables(t))
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self, what):
        if self.pos >= len(self.lines):
            raise FormatError(f"unexpected end of file, expected {what}", line=self.pos + 1)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    @property
    def lineno(self):
        return self.pos

    def keyword(self, kw, nfields=None):
        line = self.next(kw)
        parts = line.split()
        if not parts or parts[0] != kw:
            raise FormatError(f"expected {kw!r}, got {line[:40]!r}", line=self.lineno)
        if nfields is not None and len(parts) != nfields:
            raise FormatError(f"{kw!r} line needs {nfields} fields", line=self.lineno)
        return parts

    def ints(self, parts, at):
        try:
            return [int(parts[i]) for i in at]
        except (ValueError, IndexError):
            raise FormatError("expected integers", line=self.lineno) from None

    def block(self, name, dims):
        parts = self.keyword("table")
        if len(parts) < 2 or parts[1] != name:
            raise FormatError(f"expected table {name!r}", line=self.lineno)
        got = self.ints(parts, range(2, len(parts)))
        if got != list(dims):
            raise DimensionError(f"line {self.lineno}: table {name} has dims {got}, expected {list(dims)}")
        rows, cols = int(np.prod(dims[:-1])), dims[-1]
        arr = np.empty((rows, cols))
        for r in range(rows):
            line = self.next(f"row {r} of table {name}")
            vals = line.split()
            if len(vals) != cols:
                raise FormatError(f"table {name} row {r}: {len(vals)} values, expected {cols}", line=self.lineno)
            for c, v in enumerate(vals):
                try:
                    x = float(v)
                except ValueError:
                    raise FormatError(f"table {name} row {r} column {c}: not a number {v!r}",
                                      line=self.lineno) from None
                if not math.isfinite(x):
                    raise FormatError(f"table {name} row {r} column {c}: non-finite value",
                                      line=self.lineno)
                arr[r, c] = x
        return arr.reshape(dims)


def _parse_record(rd: _Reader) -> ScoreTables:
    parts = rd.keyword("record", 7)
    if parts[1::2] != ["n", "queries", "labels"]:
        raise FormatError("malformed record line", line=rd.lineno)
    n, q, L = rd.ints(parts, (2, 4, 6))
    lab_line = rd.next("labels").split("\t")
    if lab_line[0] != "labels" or len(lab_line) != L + 1:
        raise FormatError(f"expected {L} tab-separated labels", line=rd.lineno)
    labels = tuple(lab_line[1:])
    queries = []
    for _ in range(q):
        p = rd.keyword("query", 4)
        queries.append(SubtreeSpan(*rd.ints(p, (1, 2, 3))))
    start0, end0 = _root_rows(n)
    start = np.full((n + 1, n + 1), -np.inf)
    end = np.full((n + 1, n + 1), -np.inf)
    start[0], end[0] = start0, end0
    start[1:, 1:] = rd.block("start", (n, n))
    end[1:, 1:] = rd.block("end", (n, n))
    kw = {name: rd.block(name, (q, n + 1)) for name in LINK_FIELDS}
    kw["label"] = rd.block("label", (q, n + 1, L))
    rd.keyword("end", 1)
    return ScoreTables(n, labels, start, end, queries, **kw)


def load_table_records(path) -> list[ScoreTables]:
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    rd = _Reader(lines)
    if rd.next("header") != HEADER:
        raise FormatError(f"missing {HEADER!r} header", line=1)
    (count,) = rd.ints(rd.keyword("records", 2), (1,))
    out = [_parse_record(rd) for _ in range(count)]
    if rd.pos != len(lines):
        raise FormatError("trailing content after last record", line=rd.pos + 1)
    return out


def load_tables(path, sent: Optional[Sentence] = None) -> ScoreTables:
    records = load_table_records(path)
    if len(records) != 1:
        raise FormatError(f"expected a single record, found {len(records)}")
    t = records[0]
    if sent is not None and sent.n != t.n:
        raise DimensionError(f"tables are for n={t.n}, sentence has n={sent.n}")
    return t


def uniform_tables(n: int, labels: Sequence[str], queries: Iterable[SubtreeSpan] = ()) -> ScoreTables:
    queries = list(queries)
    q, L = len(queries), len(labels)
    zeros = {name: np.zeros((q, n + 1)) for name in LINK_FIELDS}
    zeros["label"] = np.zeros((q, n + 1, L))
    return ScoreTables.from_raw(np.zeros((n, n)), np.zeros((n, n)), labels, queries, zeros)


def random_tables(n: int, labels: Sequence[str], queries: Iterable[SubtreeSpan], rng, scale=1.0,
                  lazy: bool = False) -> ScoreTables:
    """Random log-distribution tables, for tests and benchmarks.

    With ``lazy=True`` link rows for queries outside ``queries`` are drawn on demand.
    """
    queries = list(queries)
    q, L = len(queries), len(labels)

    def draw(count):
        raw = {name: rng.normal(scale=scale, size=(count, n + 1)) for name in LINK_FIELDS}
        raw["label"] = rng.normal(scale=scale, size=(count, n + 1, L))
        return raw

    def provider(spans):
        raw = draw(len(spans))
        out = {name: log_softmax(raw[name], axis=1) for name in LINK_FIELDS}
        out["label"] = log_softmax(raw["label"], axis=2)
        return out

    return ScoreTables.from_raw(rng.normal(scale=scale, size=(n, n)), rng.normal(scale=scale, size=(n, n)),
                                labels, queries, draw(q), provider=provider if lazy else None)
