import math

import numpy as np
import pytest

from gradcheck import max_relative_error, perturbed_model
from spanqa.conllu import make_instance, make_instances
from spanqa.errors import ConfigError, InvalidSpanError, NotFittedError
from spanqa.model import Sentence, SubtreeSpan, gold_spans, root_span
from spanqa.scorer import (
    HEADS,
    LogLinearModel,
    TrainConfig,
    link_scores,
    span_end_scores,
    span_start_scores,
    train,
    uniform_tables,
)
from spanqa.scorer.loglinear import total_loss
from spanqa.synth import ToyGrammar


def test_single_token_start_score():
    model = LogLinearModel(["root"], feature_bits=10)
    model.fitted = True
    model.weights["start"][:] = np.random.default_rng(0).normal(size=model.dim)
    s = span_start_scores(model, Sentence.from_words(["x"]))
    assert s[1, 1] == 0.0


def test_uniform_zero_rows():
    t = uniform_tables(3, ["a", "b"], [SubtreeSpan(2, 1, 3)])
    assert np.allclose(span_start_scores(t, None)[1:, 1:], math.log(1 / 3))
    assert np.allclose(span_end_scores(t, None)[1:, 1:], math.log(1 / 3))


def test_unfitted_model_refuses():
    with pytest.raises(NotFittedError):
        LogLinearModel(["a"]).tables(Sentence.from_words(["x"]))


def test_zero_epochs_gives_uniform(toy_train):
    model = train(toy_train, TrainConfig(epochs=0, feature_bits=12))
    sent, tree = toy_train.sentences[0]
    spans = gold_spans(tree)
    t = model.tables(sent, spans)
    n = sent.n
    assert np.allclose(t.start[1:, 1:], -math.log(n))
    root, start, end, label = link_scores(t, sent, spans[1], "parent")
    assert np.allclose(root, -math.log(n + 1))
    assert np.allclose(label, -math.log(len(model.labels)))
    croot, _, _, clabel = link_scores(t, sent, spans[0], "child")
    assert clabel is None and np.allclose(croot, -math.log(n + 1))


def test_rows_normalized(toy_model, toy_test):
    for sent, tree in toy_test.sentences[:20]:
        t = toy_model.tables(sent, gold_spans(tree))
        assert t.check_normalized() < 1e-6


def test_invalid_query(toy_model, cat_sentence):
    sent, _ = cat_sentence
    t = toy_model.tables(sent)
    with pytest.raises(InvalidSpanError):
        link_scores(t, sent, (2, 3, 4))
    with pytest.raises(InvalidSpanError):
        link_scores(t, sent, (1, 1, 5))


def test_uniform_loss_is_n_log_n(toy_train):
    model = LogLinearModel(toy_train.labels(), feature_bits=12)
    for inst in make_instances(toy_train)[:10]:
        n = inst.sentence.n
        f = model.instance_features(inst)
        assert model.head_loss(f, "start")[0] == pytest.approx(n * math.log(n))
        assert model.head_loss(f, "end")[0] == pytest.approx(n * math.log(n))
        assert model.head_loss(f, "parent_root")[0] == pytest.approx(n * math.log(n + 1))
        # n+1 parent queries, each a Bernoulli per context cell at p = 0.5
        assert model.head_loss(f, "child_root")[0] == pytest.approx((n + 1) ** 2 * math.log(2))


@pytest.mark.parametrize("head", HEADS)
def test_gradients_match_finite_differences(head, toy_train):
    rng = np.random.default_rng(7)
    model = perturbed_model(LogLinearModel(toy_train.labels(), feature_bits=12), rng)
    insts = make_instances(toy_train)[:3]
    for inst in insts:
        assert max_relative_error(model, model.instance_features(inst), head, rng) < 1e-4


def test_repeated_sentence_loss_decreases(toy_train):
    inst = make_instances(toy_train)[3]
    model = train([inst] * 4, TrainConfig(epochs=10, feature_bits=14, shuffle=False))
    losses = [h["loss"] for h in model.history]
    assert all(b <= a + 1e-3 for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0] / 5


def test_training_is_deterministic(toy_train):
    data = make_instances(toy_train)[:40]
    a = train(data, TrainConfig(epochs=2, feature_bits=12, seed=3))
    b = train(data, TrainConfig(epochs=2, feature_bits=12, seed=3))
    assert all(np.array_equal(a.weights[h], b.weights[h]) for h in HEADS)


def test_resume_refused_on_feature_mismatch(toy_train):
    data = make_instances(toy_train)[:5]
    model = train(data, TrainConfig(epochs=1, feature_bits=12))
    with pytest.raises(ConfigError):
        train(data, TrainConfig(epochs=1, feature_bits=13), model=model)
    again = train(data, TrainConfig(epochs=1, feature_bits=12), model=model)
    assert len(again.history) == 2


def test_trained_start_argmax_matches_gold():
    doc = ToyGrammar().treebank(20, seed=5)
    model = train(doc, TrainConfig(epochs=10, feature_bits=16))
    hit = total = 0
    for sent, tree in doc.sentences:
        spans = gold_spans(tree)
        best = np.argmax(model.tables(sent).start[1:, 1:], axis=1) + 1
        hit += sum(int(b == sp.start) for b, sp in zip(best, spans[1:]))
        total += sent.n
    assert hit / total >= 0.9


def test_parent_of_cat_is_love(toy_model, cat_sentence):
    sent, tree = cat_sentence
    spans = gold_spans(tree)
    t = toy_model.tables(sent, spans)
    root, _, _, _ = link_scores(t, sent, spans[4], "parent")
    outside = [i for i in range(sent.n + 1) if not 3 <= i <= 4]
    assert max(outside, key=lambda i: root[i]) == 2


def test_parent_gradient_vanishes_on_separable_data():
    doc = ToyGrammar().treebank(3, seed=21)
    insts = make_instances(doc)
    model = train(insts, TrainConfig(epochs=600, lr=8.0, lr_decay=0.0, feature_bits=16, shuffle=False))
    norm2 = 0.0
    for h in ("parent_root", "parent_start", "parent_end", "parent_label"):
        g = np.zeros(model.dim)
        for inst in insts:
            _, (ix, gi) = model.head_loss(model.instance_features(inst), h)
            np.add.at(g, ix, gi)
        norm2 += float(g @ g)
    assert math.sqrt(norm2) < 1e-3


def test_loss_decreases_with_training(toy_train, toy_model):
    data = make_instances(toy_train)[:30]
    untrained = LogLinearModel(toy_train.labels(), feature_bits=18)
    assert total_loss(toy_model, data) < 0.2 * total_loss(untrained, data)


def test_save_load_round_trip(tmp_path, toy_model, cat_sentence):
    path = tmp_path / "m.npz"
    toy_model.save(path)
    back = LogLinearModel.load(path)
    sent, tree = cat_sentence
    spans = gold_spans(tree)
    assert back.tables(sent, spans).same_values(toy_model.tables(sent, spans))
    assert back.labels == toy_model.labels


def test_root_span_query_rows(toy_model):
    sent = Sentence.from_words(["go"], ["VERB"])
    t = toy_model.tables(sent, [root_span(1)])
    root, start, end, label = link_scores(t, sent, root_span(1), "child")
    assert label is None
    assert root.shape == (2,)
    assert root[1] > root[0]
