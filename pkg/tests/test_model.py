import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanqa.errors import CycleError, MultiRootError, NonProjectiveError, TreeIndexError
from spanqa.model import (
    LabeledArc,
    Sentence,
    SubtreeSpan,
    gold_spans,
    is_projective,
    tree_from_arcs,
    tree_from_spans,
    validate_tree,
)


def span_text(sent, span):
    return " ".join(sent.forms[span.start:span.end + 1])


def test_cat_sentence_gold_spans(cat_sentence):
    sent, tree = cat_sentence
    spans = gold_spans(tree, sent)
    assert spans[0] == (0, 0, 4)
    assert span_text(sent, spans[0]) == "<root> I love Tim's cat"
    assert span_text(sent, spans[1]) == "I"
    assert spans[2] == (2, 1, 4)
    assert span_text(sent, spans[2]) == "I love Tim's cat"
    assert span_text(sent, spans[3]) == "Tim's"
    assert spans[4] == (4, 3, 4)
    assert span_text(sent, spans[4]) == "Tim's cat"


def test_single_token_span():
    tree = validate_tree([0], ["root"], 1)
    assert gold_spans(tree) == [(0, 0, 1), (1, 1, 1)]


def test_gold_spans_rejects_nonprojective():
    tree = validate_tree([3, 4, 0, 3], None, 4)  # 1->3 crosses 2->4
    with pytest.raises(NonProjectiveError):
        gold_spans(tree)


@pytest.mark.parametrize("heads,expected", [
    ([2, 0, 4, 2], True),
    ([3, 4, 0, 3], False),
    ([0, 1, 2, 3], True),  # chain headed by left neighbour
    ([2, 0, 2], True),
    ([0, 4, 1, 1], False),  # 1->3 and 4->2 cross
])
def test_is_projective_examples(heads, expected):
    assert is_projective(validate_tree(heads, None, len(heads))) is expected


def test_validate_tree_examples():
    assert validate_tree([0], None, 1).heads == (0,)
    with pytest.raises(CycleError):
        validate_tree([2, 1], None, 2)
    with pytest.raises(MultiRootError):
        validate_tree([0, 0], None, 2)
    with pytest.raises(CycleError):
        validate_tree([1], None, 1)
    with pytest.raises(TreeIndexError):
        validate_tree([0, 5], None, 2)
    with pytest.raises(CycleError):
        validate_tree([0, 3, 2], None, 3)


def test_sentence_requires_tokens():
    with pytest.raises(ValueError):
        Sentence.from_words([])
    assert Sentence.from_words(["a"]).forms == ["<root>", "a"]


# -- properties

@st.composite
def trees(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    order = draw(st.permutations(range(1, n + 1)))
    heads = [0] * n
    placed = [order[0]]
    for v in order[1:]:
        heads[v - 1] = draw(st.sampled_from(placed))
        placed.append(v)
    return validate_tree(heads, [f"l{h}" for h in heads], n)


def brute_yields_contiguous(tree):
    n = tree.n
    for i in range(1, n + 1):
        desc = {i}
        changed = True
        while changed:
            changed = False
            for d in range(1, n + 1):
                if d not in desc and tree.head(d) in desc:
                    desc.add(d)
                    changed = True
        if max(desc) - min(desc) + 1 != len(desc):
            return False
    return True


@given(trees())
@settings(max_examples=300, deadline=None)
def test_projectivity_equals_contiguous_yields(tree):
    assert is_projective(tree) == brute_yields_contiguous(tree)


@given(trees())
@settings(max_examples=200, deadline=None)
def test_child_span_inside_parent_span(tree):
    if not is_projective(tree):
        return
    spans = gold_spans(tree)
    for arc in tree.arcs():
        p, c = spans[arc.parent], spans[arc.child]
        assert p.start <= c.start <= c.end <= p.end


@given(trees())
@settings(max_examples=200, deadline=None)
def test_tree_round_trips_through_spans_and_arcs(tree):
    assert tree_from_arcs(tree.arcs(), tree.n) == tree
    if is_projective(tree):
        assert tree_from_spans(gold_spans(tree), tree.labels) == tree


def test_span_helpers():
    sp = SubtreeSpan(2, 1, 4)
    assert sp.length == 3
    assert sp.contains(SubtreeSpan(4, 3, 4))
    assert not SubtreeSpan(4, 3, 4).contains(sp)
    assert SubtreeSpan(0, 0, 4).is_valid(4)
    assert not SubtreeSpan(0, 0, 3).is_valid(4)
    assert not SubtreeSpan(2, 3, 4).is_valid(4)
    assert LabeledArc(2, 4, "obj").label == "obj"
