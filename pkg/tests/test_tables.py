import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanqa.errors import DimensionError, FormatError
from spanqa.model import Sentence, SubtreeSpan
from spanqa.scorer.tables import (
    QueryEncoding,
    ScoreTables,
    load_table_records,
    load_tables,
    random_tables,
    save_tables,
    span_table_from_raw,
    uniform_tables,
)
from spanqa.proposal import all_spans


def test_root_rows_are_canonical():
    t = uniform_tables(3, ["a"])
    assert t.start[0, 0] == 0 and t.end[0, 3] == 0
    assert np.all(np.isneginf(t.start[1:, 0]))
    assert np.allclose(t.start[1:, 1:], math.log(1 / 3))


def test_random_tables_normalized(rng):
    t = random_tables(6, ["a", "b", "c"], all_spans(6), rng, scale=3.0)
    assert t.check_normalized() < 1e-9


def test_save_load_identity(tmp_path, rng):
    t = random_tables(5, ["x", "nmod:poss"], all_spans(5)[:7], rng)
    path = tmp_path / "t.tables"
    save_tables(t, path)
    back = load_tables(path, Sentence.from_words(list("abcde")))
    assert back.same_values(t)


def test_multi_record_identity(tmp_path, rng):
    ts = [random_tables(n, ["a"], all_spans(n)[:3], rng) for n in (1, 2, 4)]
    path = tmp_path / "m.tables"
    save_tables(ts, path)
    back = load_table_records(path)
    assert all(a.same_values(b) for a, b in zip(ts, back))
    with pytest.raises(FormatError):
        load_tables(path)


def test_truncated_file(tmp_path, rng):
    path = tmp_path / "t.tables"
    save_tables(random_tables(3, ["a"], all_spans(3), rng), path)
    text = path.read_text()
    for cut in (len(text) // 3, len(text) // 2, len(text) - 10):
        path.write_text(text[:cut])
        with pytest.raises(FormatError):
            load_tables(path)


def test_corrupt_cell_location(tmp_path, rng):
    path = tmp_path / "t.tables"
    save_tables(random_tables(3, ["a"], [], rng), path)
    lines = path.read_text().split("\n")
    idx = next(i for i, ln in enumerate(lines) if ln.startswith("table start"))
    cells = lines[idx + 2].split(" ")
    cells[1] = "bogus"
    lines[idx + 2] = " ".join(cells)
    path.write_text("\n".join(lines))
    with pytest.raises(FormatError) as exc:
        load_tables(path)
    assert exc.value.line == idx + 3


def test_dimension_mismatch(tmp_path, rng):
    path = tmp_path / "t.tables"
    save_tables(random_tables(3, ["a"], [], rng), path)
    with pytest.raises(DimensionError):
        load_tables(path, Sentence.from_words(["only", "two"]))


def test_nonfinite_rejected(tmp_path):
    t = uniform_tables(2, ["a"], [SubtreeSpan(1, 1, 1)])
    t.parent_root[0, 1] = float("nan")
    with pytest.raises(FormatError):
        save_tables(t, tmp_path / "bad.tables")


def test_span_table_from_raw_softmax():
    raw = np.array([[0.0, 1.0], [2.0, 2.0]])
    s = span_table_from_raw(raw, "start")
    assert s.shape == (3, 3)
    assert np.allclose(np.exp(s[1, 1:]).sum(), 1)
    assert np.allclose(s[2, 1:], math.log(0.5))


@given(st.lists(st.text(min_size=1, max_size=4).filter(lambda w: not any(c.isspace() for c in w)),
                min_size=1, max_size=10), st.data())
@settings(max_examples=200, deadline=None)
def test_query_encoding_strip(words, data):
    sent = Sentence.from_words(words)
    span = data.draw(st.sampled_from(all_spans(sent.n, include_root=True)))
    enc = QueryEncoding.encode(sent, span)
    assert enc.strip() == sent.forms
    pos = enc.marker_positions()
    assert pos["<sos>"] < pos["<sor>"] < pos["<eor>"] < pos["<eos>"]
    assert pos["<eor>"] - pos["<sor>"] == 2
    assert pos["<eos>"] - pos["<sos>"] == span.end - span.start + 4


def test_query_encoding_with_marker_like_forms():
    sent = Sentence.from_words(["<sos>", "<eos>", "x"])
    enc = QueryEncoding.encode(sent, SubtreeSpan(2, 2, 3))
    assert enc.strip() == sent.forms


def test_missing_query_raises():
    from spanqa.errors import MissingQueryError
    t = uniform_tables(2, ["a"])
    with pytest.raises(MissingQueryError):
        t.link_rows(SubtreeSpan(1, 1, 1))
    assert isinstance(t, ScoreTables)
