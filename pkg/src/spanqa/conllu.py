"""CoNLL-U reading/writing and training-instance derivation."""
from __future__ import annotations

import io
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

from .errors import MultiRootWarning, NonProjectiveError, ParseError, TreeError
from .model import (
    ROOT_FORM,
    ROOT_UPOS,
    DepTree,
    LabeledArc,
    Sentence,
    SubtreeSpan,
    Token,
    gold_spans,
    validate_tree,
)

DEFAULT_PUNCT = frozenset({"PUNCT"})


@dataclass
class TreebankDoc:
    sentences: list[tuple[Sentence, DepTree]] = field(default_factory=list)
    provenance: Optional[str] = None

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __eq__(self, other):
        if not isinstance(other, TreebankDoc):
            return NotImplemented
        return self.sentences == other.sentences

    def labels(self) -> list[str]:
        return sorted({l for _, t in self.sentences for l in t.labels})

    def projective_fraction(self) -> float:
        from .model import is_projective

        if not self.sentences:
            return 1.0
        return sum(is_projective(t) for _, t in self.sentences) / len(self.sentences)


class Instance(NamedTuple):
    sentence: Sentence
    spans: Optional[list[SubtreeSpan]]  # None for non-projective trees
    arcs: list[LabeledArc]
    tree: DepTree

    @property
    def projective(self) -> bool:
        return self.spans is not None


def _repair_roots(heads: list[int], sent_line: int, path) -> list[int]:
    roots = [i for i, h in enumerate(heads, 1) if h == 0]
    if len(roots) <= 1:
        return heads
    first = roots[0]
    warnings.warn(
        MultiRootWarning(
            f"{path or '<string>'}:{sent_line}: {len(roots)} root attachments, "
            f"extra roots reattached to token {first}"
        ),
        stacklevel=3,
    )
    heads = list(heads)
    for r in roots[1:]:
        heads[r - 1] = first
    return heads


def _finish(rows, comments, sent_line, path):
    if not rows:
        raise ParseError("sentence without tokens", line=sent_line, path=path)
    tokens = [Token(ROOT_FORM, ROOT_UPOS)]
    heads, labels = [], []
    for lineno, cols in rows:
        expect = len(tokens)
        if cols[0] != str(expect):
            raise ParseError(f"expected token id {expect}, got {cols[0]!r}", line=lineno, path=path)
        try:
            heads.append(int(cols[6]))
        except ValueError:
            raise ParseError(f"bad HEAD {cols[6]!r}", line=lineno, path=path) from None
        labels.append(cols[7])
        tokens.append(Token(cols[1], cols[3], (cols[2], cols[4], cols[5], cols[8], cols[9])))
    sent = Sentence(tuple(tokens), tuple(comments))
    heads = _repair_roots(heads, sent_line, path)
    try:
        tree = validate_tree(heads, labels, sent.n)
    except TreeError as exc:
        raise ParseError(str(exc), line=sent_line, path=path) from exc
    return sent, tree


def iter_conllu(lines: Iterable[str], path=None) -> Iterator[tuple[Sentence, DepTree]]:
    rows: list = []
    comments: list[str] = []
    sent_line = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if sent_line is not None:
                yield _finish(rows, comments, sent_line, path)
            rows, comments, sent_line = [], [], None
            continue
        if sent_line is None:
            sent_line = lineno
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"expected 10 tab-separated columns, got {len(cols)}", line=lineno, path=path)
        if "-" in cols[0] or "." in cols[0]:
            continue  # multi-word token range or empty node
        rows.append((lineno, cols))
    if sent_line is not None:
        yield _finish(rows, comments, sent_line, path)


def read_conllu(path) -> TreebankDoc:
    with open(path, encoding="utf-8") as f:
        return TreebankDoc(list(iter_conllu(f, path=os.fspath(path))), provenance=os.fspath(path))


def loads(text: str) -> TreebankDoc:
    return TreebankDoc(list(iter_conllu(io.StringIO(text))))


def format_sentence(sent: Sentence, tree: DepTree) -> str:
    out = list(sent.comments)
    for i, tok in enumerate(sent.tokens[1:], 1):
        lemma, xpos, feats, deps, misc = tok.extra
        out.append(
            "\t".join(
                (str(i), tok.form, lemma, tok.upos, xpos, feats,
                 str(tree.head(i)), tree.label(i), deps, misc)
            )
        )
    return "\n".join(out) + "\n"


def dumps(doc: TreebankDoc) -> str:
    return "".join(format_sentence(s, t) + "\n" for s, t in doc.sentences)


def write_conllu(doc: TreebankDoc, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(doc))


def make_instance(sent: Sentence, tree: DepTree) -> Instance:
    try:
        spans = gold_spans(tree, sent)
    except NonProjectiveError:
        spans = None
    return Instance(sent, spans, tree.arcs(), tree)


def make_instances(doc: TreebankDoc) -> list[Instance]:
    return [make_instance(s, t) for s, t in doc.sentences]


def punct_mask(sent: Sentence, punct_set=DEFAULT_PUNCT) -> list[bool]:
    """True for real tokens excluded from evaluation (index 0 is the root, always False)."""
    return [False] + [t.upos in punct_set for t in sent.tokens[1:]]
