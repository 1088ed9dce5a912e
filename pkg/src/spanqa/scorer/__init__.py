"""Score backends: file-backed tables and the trainable log-linear model."""
from .loglinear import HEADS, UNK_LABEL, LogLinearModel, TrainConfig, train
from .tables import (
    LINK_FIELDS,
    QueryEncoding,
    ScoreTables,
    load_table_records,
    load_tables,
    random_tables,
    save_tables,
    uniform_tables,
)


def span_start_scores(backend, sent):
    """Row i: log-distribution over the start of token i's subtree."""
    tables = backend if isinstance(backend, ScoreTables) else backend.tables(sent)
    return tables.start


def span_end_scores(backend, sent):
    tables = backend if isinstance(backend, ScoreTables) else backend.tables(sent)
    return tables.end


def link_scores(tables: ScoreTables, sent, query, direction="parent"):
    """(root row, start row, end row, label block) for ``query``; label block is None for the child direction."""
    from ..errors import InvalidSpanError
    from ..model import SubtreeSpan

    query = SubtreeSpan(*query)
    if not query.is_valid(sent.n if sent is not None else tables.n):
        raise InvalidSpanError(f"invalid query span {tuple(query)}")
    return tables.link_rows(query, direction)
