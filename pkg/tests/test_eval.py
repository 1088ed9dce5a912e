import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanqa.errors import NonProjectiveError
from spanqa.eval import bucket_report, corpus_uas_las, span_recall, uas_las
from spanqa.model import Sentence, validate_tree
from spanqa.synth import ToyGrammar, random_heads


def test_perfect_and_all_wrong():
    sent = Sentence.from_words(list("abc"))
    gold = validate_tree([2, 0, 2], ["x", "root", "y"], 3)
    assert uas_las(gold, gold, sent) == (1.0, 1.0)
    wrong = validate_tree([0, 3, 1], ["x", "root", "y"], 3)
    assert uas_las(wrong, gold, sent) == (0.0, 0.0)


def test_punctuation_excluded_arithmetic():
    sent = Sentence.from_pairs([("a", "X"), ("b", "X"), ("c", "X"), (".", "PUNCT")])
    gold = validate_tree([2, 0, 2, 2], ["p", "root", "q", "punct"], 4)
    pred = validate_tree([2, 0, 2, 3], ["p", "root", "WRONG", "punct"], 4)
    uas, las = uas_las(pred, gold, sent)
    assert uas == 1.0 and las == pytest.approx(2 / 3)
    uas, _ = uas_las(pred, gold, sent, punct_set=set())
    assert uas == pytest.approx(3 / 4)


def test_length_mismatch():
    with pytest.raises(ValueError):
        uas_las(validate_tree([0], None, 1), validate_tree([0, 1], None, 2), Sentence.from_words(["a"]))


def test_span_recall_examples():
    gold = [(0, 0, 2), (1, 1, 2), (2, 2, 2)]
    assert span_recall(gold, gold) == 1.0
    assert span_recall(gold + [(2, 1, 2)], gold) == 1.0
    assert span_recall([], gold) == 0.0
    assert span_recall([(1, 1, 2)], gold) == 0.5


@st.composite
def corpora(draw):
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    sents, golds, preds = [], [], []
    for _ in range(draw(st.integers(1, 8))):
        n = int(rng.integers(1, 15))
        pos = ["PUNCT" if rng.random() < 0.2 else "X" for _ in range(n)]
        sents.append(Sentence.from_pairs([(f"w{i}", p) for i, p in enumerate(pos)]))
        labels = ["a", "b"]
        golds.append(validate_tree(random_heads(n, rng, projective=True),
                                   [labels[int(rng.integers(2))] for _ in range(n)], n))
        preds.append(validate_tree(random_heads(n, rng, projective=bool(rng.integers(2))),
                                   [labels[int(rng.integers(2))] for _ in range(n)], n))
    return preds, golds, sents


@given(corpora())
@settings(max_examples=80, deadline=None)
def test_las_at_most_uas(corpus):
    preds, golds, sents = corpus
    for p, g, s in zip(*corpus):
        u, l = uas_las(p, g, s)
        assert 0 <= l <= u <= 1
    u, l = corpus_uas_las(preds, golds, sents)
    assert 0 <= l <= u <= 1


@given(corpora(), st.sampled_from(["sentence-length", "dependency-length", "subtree-span-length"]))
@settings(max_examples=80, deadline=None)
def test_bucket_weighted_mean_is_overall(corpus, bucketing):
    preds, golds, sents = corpus
    rep = bucket_report(preds, golds, sents, bucketing)
    overall, _ = corpus_uas_las(preds, golds, sents)
    if rep.tokens == 0:
        return
    weighted = sum(r.uas * r.tokens for r in rep.nonempty()) / rep.tokens
    assert weighted == pytest.approx(overall)
    assert rep.uas == pytest.approx(overall)


def test_single_bucket_for_equal_lengths():
    doc = ToyGrammar().treebank(40, seed=1)
    same = [(s, t) for s, t in doc.sentences if s.n == doc.sentences[0][0].n]
    sents, golds = zip(*same)
    rep = bucket_report(golds, golds, sents, "sentence-length")
    assert len(rep.nonempty()) == 1


def test_span_buckets_are_seven():
    sent = Sentence.from_words(list("ab"))
    t = validate_tree([0, 1], None, 2)
    rep = bucket_report([t], [t], [sent], "subtree-span-length")
    assert len(rep.rows) == 7
    assert all(math.isnan(r.recall) or r.recall == 1.0 for r in rep.rows)
    assert "subtree-span-length" in rep.to_text()
    header, *rows = rep.to_tsv().strip().split("\n")
    assert header.split("\t") == ["bucket", "tokens", "uas", "span_recall"]
    assert len(rows) == 7
