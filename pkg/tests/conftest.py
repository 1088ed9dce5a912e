import numpy as np
import pytest

from spanqa.conllu import make_instance
from spanqa.model import Sentence, validate_tree
from spanqa.scorer import TrainConfig, train
from spanqa.synth import ToyGrammar

CAT_WORDS = ["I", "love", "Tim's", "cat"]
CAT_UPOS = ["PRON", "VERB", "PROPN", "NOUN"]
CAT_HEADS = [2, 0, 4, 2]
CAT_LABELS = ["nsubj", "root", "nmod:poss", "obj"]


@pytest.fixture
def cat_sentence():
    sent = Sentence.from_words(CAT_WORDS, CAT_UPOS)
    tree = validate_tree(CAT_HEADS, CAT_LABELS, 4)
    return sent, tree


@pytest.fixture
def cat_instance(cat_sentence):
    return make_instance(*cat_sentence)


@pytest.fixture(scope="session")
def toy_train():
    return ToyGrammar().treebank(300, seed=11)


@pytest.fixture(scope="session")
def toy_test():
    return ToyGrammar().treebank(200, seed=12)


@pytest.fixture(scope="session")
def toy_model(toy_train):
    return train(toy_train, TrainConfig(epochs=8, feature_bits=18, seed=0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
