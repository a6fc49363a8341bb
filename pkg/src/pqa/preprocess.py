"""Structured row filters extracted from preprocessing clauses in a query.

Queries like "only consider female data ..." or "only consider house age less
than 30 ..." restrict the training set.  Instead of generating and executing
code for the restriction, the clause is parsed into a small predicate AST and
applied directly: same effect, no code execution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .catalog import CATEGORICAL, NUMERIC, ColumnMeta
from .errors import EmptyResult, UnresolvedClause

OP_EQ = "eq"
OP_LT = "lt"
OP_LE = "le"
OP_GT = "gt"
OP_GE = "ge"

_COMPARATORS = (
    ("less than", OP_LT),
    ("fewer than", OP_LT),
    ("greater than", OP_GT),
    ("more than", OP_GT),
    ("at most", OP_LE),
    ("at least", OP_GE),
)

_TASK_VERBS = ("predict", "recommend", "classify", "estimate", "forecast")


@dataclass(frozen=True)
class Clause:
    column: str
    op: str  # eq | lt | le | gt | ge
    value: float | str


@dataclass(frozen=True)
class Predicate:
    clauses: tuple[Clause, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.clauses)


def parse_filter(query: str, schema: list[ColumnMeta] | tuple[ColumnMeta, ...]) -> Predicate:
    """Extract restriction clauses from the query against the given schema."""
    clauses = []
    for segment in _restriction_segments(query):
        clauses.append(_parse_segment(segment, schema))
    return Predicate(tuple(clauses))


def _restriction_segments(query: str) -> list[str]:
    """The restriction text of each "only consider ..." / "from the past ..."
    clause, cut at the next comma or task verb."""
    lowered = query.lower()
    segments = []
    for match in re.finditer(r"(?:only consider|from the past)\s+", lowered):
        rest = lowered[match.end() :]
        cut = len(rest)
        for stop in [","] + [f"{v} " for v in _TASK_VERBS]:
            pos = rest.find(stop)
            if pos >= 0:
                cut = min(cut, pos)
        head = match.group(0).strip()
        segment = rest[:cut].strip()
        if head.startswith("from the past"):
            segment = f"from the past {segment}"
        segments.append(segment)
    return segments


def _parse_segment(segment: str, schema) -> Clause:
    if segment.startswith("from the past"):
        # relative time windows need a date column; no schema here carries one
        raise UnresolvedClause(segment)

    for phrase, op in _COMPARATORS:
        idx = segment.find(phrase)
        if idx < 0:
            continue
        column_phrase = segment[:idx].strip()
        value_text = segment[idx + len(phrase) :].strip()
        number = re.match(r"[-+]?\d+(?:\.\d+)?", value_text)
        if not number:
            raise UnresolvedClause(segment)
        column = _match_column(column_phrase, schema, numeric_only=True)
        if column is None:
            raise UnresolvedClause(segment)
        return Clause(column, op, float(number.group(0)))

    # "only consider <category> data": a categorical value names its column
    tokens = [t for t in re.split(r"[^a-z0-9.]+", segment) if t and t != "data"]
    for token in tokens:
        for col in schema:
            if col.dtype == CATEGORICAL and any(token == v.lower() for v in col.categories):
                value = next(v for v in col.categories if v.lower() == token)
                return Clause(col.name, OP_EQ, value)
    raise UnresolvedClause(segment)


def _match_column(phrase: str, schema, numeric_only: bool = False) -> str | None:
    """Best token-overlap column for a phrase; ties resolve to schema order."""
    phrase_tokens = [t for t in re.split(r"[^a-z0-9]+", phrase.lower()) if t]
    best: tuple[int, int] | None = None
    best_col = None
    for pos, col in enumerate(schema):
        if numeric_only and col.dtype != NUMERIC:
            continue
        col_tokens = [t for t in re.split(r"[^a-z0-9]+", col.name.lower()) if t]
        score = sum(1 for t in phrase_tokens if t in col_tokens)
        if score > 0 and (best is None or (score, -pos) > best):
            best = (score, -pos)
            best_col = col.name
    return best_col


def apply_filter(rows: list[dict[str, str]], predicate: Predicate) -> list[dict[str, str]]:
    """Rows satisfying every clause, original order preserved."""
    if not predicate.clauses:
        return list(rows)
    kept = [row for row in rows if all(_matches(row, clause) for clause in predicate.clauses)]
    if not kept:
        raise EmptyResult("no rows satisfy the filter")
    return kept


def _matches(row: dict[str, str], clause: Clause) -> bool:
    cell = row.get(clause.column, "")
    if clause.op == OP_EQ:
        if isinstance(clause.value, str):
            return cell.strip().lower() == clause.value.strip().lower()
        try:
            return float(cell) == clause.value
        except ValueError:
            return False
    try:
        number = float(cell)
    except ValueError:
        return False
    if clause.op == OP_LT:
        return number < clause.value
    if clause.op == OP_LE:
        return number <= clause.value
    if clause.op == OP_GT:
        return number > clause.value
    return number >= clause.value
