"""Proposal -> retrieval -> decoding for one sentence."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .decoder import decode_mst, decode_projective
from .errors import Infeasible
from .linking import retrieve_parents
from .model import DepTree, Sentence
from .proposal import DEFAULT_K, CandidateSet, propose
from .scorer.tables import ScoreTables

log = logging.getLogger(__name__)


@dataclass
class ParseResult:
    tree: DepTree
    score: float
    candidates: CandidateSet
    proposed: CandidateSet
    decoder: str
    fell_back: bool = False


def candidates_for(tables: ScoreTables, sent: Optional[Sentence], k: int = DEFAULT_K, retrieve: bool = True):
    proposed = propose(tables, sent, k)
    cands = retrieve_parents(tables, proposed) if retrieve else proposed
    return proposed, cands


def parse_tables(tables: ScoreTables, sent: Optional[Sentence] = None, k: int = DEFAULT_K, lam: float = 1.0,
                 decoder: str = "proj", retrieve: bool = True, fallback: bool = True) -> ParseResult:
    proposed, cands = candidates_for(tables, sent, k, retrieve)
    if decoder == "mst":
        tree, score = decode_mst(cands, tables, lam)
        return ParseResult(tree, score, cands, proposed, "mst")
    if decoder != "proj":
        raise ValueError(f"unknown decoder {decoder!r}")
    try:
        tree, score = decode_projective(cands, tables, lam)
        return ParseResult(tree, score, cands, proposed, "proj")
    except Infeasible:
        if not fallback:
            raise
        log.warning("projective decoding infeasible at k=%d; falling back to mst", k)
        tree, score = decode_mst(cands, tables, lam)
        return ParseResult(tree, score, cands, proposed, "mst", fell_back=True)


def parse(model, sent: Sentence, k: int = DEFAULT_K, lam: float = 1.0, decoder: str = "proj",
          retrieve: bool = True, fallback: bool = True) -> ParseResult:
    return parse_tables(model.tables(sent), sent, k, lam, decoder, retrieve, fallback)
