"""Synthetic treebanks: a deterministic toy grammar and a random fuzz corpus."""
from __future__ import annotations

import numpy as np

from .conllu import TreebankDoc
from .model import DepTree, Sentence, Token, ROOT_FORM, ROOT_UPOS, validate_tree

LEXICON = {
    "DET": ["the", "a", "this", "every", "some"],
    "ADJ": ["big", "small", "red", "old", "happy", "quiet", "green"],
    "NOUN": ["cat", "dog", "park", "house", "car", "idea", "man", "woman", "city", "book", "tree", "bird"],
    "PROPN": ["tim", "anna", "paris", "rex"],
    "PRON": ["she", "he", "they", "it"],
    "VERB": ["saw", "loves", "found", "took", "built", "watched", "sleeps", "runs"],
    "ADV": ["often", "never", "quickly", "also"],
    "ADP": ["in", "on", "near", "with", "under"],
    "PUNCT": ["."],
}


class ToyGrammar:
    """Generates projective UD-style trees; heads are fully determined by the
    generating rules:

    S  -> [ADV] SUBJ VERB [OBJ] PP* PUNCT, VERB is the root
    NP -> [DET] ADJ* NOUN [PP]  (DET/ADJ attach to the NOUN)  |  PROPN  |  PRON
    PP -> ADP NP, ADP attaches to the NP head, the PP head to the preceding noun
          inside an NP or to the verb when it follows the clause (obl)
    """

    def __init__(self, max_depth: int = 2, pp_rate: float = 0.35):
        self.max_depth = max_depth
        self.pp_rate = pp_rate

    def _word(self, rng, pos):
        words = LEXICON[pos]
        return words[int(rng.integers(len(words)))]

    def _np(self, rng, toks, depth, allow_pron=True):
        """Append an NP; returns index of its head (1-based)."""
        r = rng.random()
        if allow_pron and r < 0.12:
            toks.append([self._word(rng, "PRON"), "PRON", None, None])
            return len(toks)
        if r < 0.25:
            toks.append([self._word(rng, "PROPN"), "PROPN", None, None])
            return len(toks)
        deps = []
        if rng.random() < 0.75:
            toks.append([self._word(rng, "DET"), "DET", None, "det"])
            deps.append(len(toks))
        for _ in range(int(rng.integers(0, 3))):
            toks.append([self._word(rng, "ADJ"), "ADJ", None, "amod"])
            deps.append(len(toks))
        toks.append([self._word(rng, "NOUN"), "NOUN", None, None])
        head = len(toks)
        for d in deps:
            toks[d - 1][2] = head
        if depth < self.max_depth and rng.random() < self.pp_rate:
            pp = self._pp(rng, toks, depth + 1)
            toks[pp - 1][2] = head
            toks[pp - 1][3] = "nmod"
        return head

    def _pp(self, rng, toks, depth):
        toks.append([self._word(rng, "ADP"), "ADP", None, "case"])
        adp = len(toks)
        head = self._np(rng, toks, depth, allow_pron=False)
        toks[adp - 1][2] = head
        return head

    def sentence(self, rng) -> tuple[Sentence, DepTree]:
        toks: list = []
        adv = None
        if rng.random() < 0.2:
            toks.append([self._word(rng, "ADV"), "ADV", None, "advmod"])
            adv = len(toks)
        subj = self._np(rng, toks, 0)
        toks[subj - 1][3] = "nsubj"
        toks.append([self._word(rng, "VERB"), "VERB", 0, "root"])
        verb = len(toks)
        toks[subj - 1][2] = verb
        if adv:
            toks[adv - 1][2] = verb
        if rng.random() < 0.7:
            obj = self._np(rng, toks, 0)
            toks[obj - 1][2] = verb
            toks[obj - 1][3] = "obj"
        while rng.random() < 0.3:
            pp = self._pp(rng, toks, 1)
            toks[pp - 1][2] = verb
            toks[pp - 1][3] = "obl"
        toks.append([".", "PUNCT", verb, "punct"])
        sent = Sentence.from_pairs((f, p) for f, p, _, _ in toks)
        tree = validate_tree([h for _, _, h, _ in toks], [l for _, _, _, l in toks], len(toks))
        return sent, tree

    def treebank(self, size: int, seed: int = 0) -> TreebankDoc:
        rng = np.random.default_rng(seed)
        return TreebankDoc([self.sentence(rng) for _ in range(size)], provenance=f"toy-grammar:seed={seed}")


def random_heads(n: int, rng, projective: bool = False) -> list[int]:
    """A uniformly-built random single-root tree (random attachment order)."""
    if projective:
        return _random_projective(1, n, rng, root_head=0)
    order = rng.permutation(np.arange(1, n + 1)).tolist()
    heads = [0] * n
    placed = [order[0]]
    for v in order[1:]:
        heads[v - 1] = placed[int(rng.integers(len(placed)))]
        placed.append(v)
    return heads


def _random_projective(s, e, rng, root_head):
    heads = [0] * (e + 1)

    def build(lo, hi, head):
        if lo > hi:
            return
        r = int(rng.integers(lo, hi + 1))
        heads[r] = head
        # split each side into adjacent child subtrees
        for a, b in ((lo, r - 1), (r + 1, hi)):
            p = a
            while p <= b:
                q = int(rng.integers(p, b + 1))
                build(p, q, r)
                p = q + 1

    build(s, e, root_head)
    return heads[1:]


_FUZZ_CHARS = list("abcdefghijklmnopqrstuvwxyzÄéßçøあ漢字-'’:.,$%") + ["ε", "Ω"]
_FUZZ_LABELS = ["nsubj", "obj", "nmod:poss", "acl:relcl", "det", "root", "punct", "obl:tmod", "compound:prt"]
_FUZZ_POS = ["NOUN", "VERB", "ADJ", "PUNCT", "DET", "ADP", "PRON", "X", "SYM"]


def fuzz_treebank(size: int, seed: int = 0, max_len: int = 25) -> TreebankDoc:
    """Random sentences and trees (projective and not) with awkward forms,
    labels with subtypes and filled-in extra columns."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        n = int(rng.integers(1, max_len + 1))
        heads = random_heads(n, rng, projective=bool(rng.random() < 0.5))
        toks = [Token(ROOT_FORM, ROOT_UPOS)]
        for i in range(n):
            form = "".join(rng.choice(_FUZZ_CHARS, size=int(rng.integers(1, 8))))
            extra = (
                form.lower(),
                str(rng.choice(["NN", "VB", "_", "JJ"])),
                str(rng.choice(["_", "Number=Sing", "Case=Nom|Number=Plur"])),
                "_",
                str(rng.choice(["_", "SpaceAfter=No"])),
            )
            toks.append(Token(form, str(rng.choice(_FUZZ_POS)), extra))
        labels = [str(rng.choice(_FUZZ_LABELS)) for _ in range(n)]
        comments = (f"# sent_id = fuzz-{seed}-{k}",) if rng.random() < 0.7 else ()
        out.append((Sentence(tuple(toks), comments), validate_tree(heads, labels, n)))
    return TreebankDoc(out, provenance=f"fuzz:seed={seed}")
