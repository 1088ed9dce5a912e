"""Dependency parsing by scoring links between subtree spans."""
from .model import DepTree, LabeledArc, Sentence, SubtreeSpan, Token, gold_spans, is_projective, validate_tree

__version__ = "0.1.0"
