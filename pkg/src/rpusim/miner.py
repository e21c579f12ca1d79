"""Recurring-sequence mining over query logs.

Log lines are ``epoch_ms<TAB>query_text`` with an optional third
``duration_ms`` field.  Query texts are reduced to templates (constants
parameterized away), and contiguous template n-grams whose internal gaps stay
under a session cutoff are counted.  Gaps are completion-to-arrival: the next
arrival minus the previous arrival minus the previous duration when the log
has durations, minus nothing when it does not (which overestimates the gap).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import MiningError
from .model import FilterOp, Query, QuerySequence, TableSpec, require_valid

_SQL_KEYWORDS = frozenset(
    """
    select from where and or not in is null like between group by order having
    limit offset join inner left right outer on as distinct union all exists
    insert into values update set delete case when then else end asc desc
    """.split()
)

_STRING_RE = re.compile(r"'(?:[^']|'')*'|\"[^\"]*\"")
_NUMBER_RE = re.compile(r"(?<![\w.])\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def normalize_query(text: str) -> str:
    """Canonical template of a query: constants -> ``?``, keywords lowercased."""
    if not text.strip():
        raise MiningError("empty query text")
    t = _STRING_RE.sub("?", text)
    t = _NUMBER_RE.sub("?", t)
    t = " ".join(t.split())
    return _WORD_RE.sub(
        lambda m: m.group(0).lower() if m.group(0).lower() in _SQL_KEYWORDS else m.group(0),
        t,
    )


def fingerprint(text: str) -> str:
    """Stable template id: hash of the normalized query text."""
    template = normalize_query(text)
    return hashlib.sha1(template.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class LogEntry:
    timestamp_ms: float
    text: str
    duration_ms: float | None = None


def parse_log(source: str | Path | Iterable[str]) -> list[LogEntry]:
    """Read log lines and return entries sorted by timestamp."""
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = [line.rstrip("\n") for line in source]
    entries = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise MiningError(f"line {n}: expected 2 or 3 tab-separated fields, got {len(parts)}")
        try:
            ts = float(parts[0])
            duration = float(parts[2]) if len(parts) == 3 else None
        except ValueError as exc:
            raise MiningError(f"line {n}: {exc}") from exc
        if not parts[1].strip():
            raise MiningError(f"line {n}: empty query text")
        entries.append(LogEntry(timestamp_ms=ts, text=parts[1], duration_ms=duration))
    entries.sort(key=lambda e: e.timestamp_ms)
    return entries


@dataclass(frozen=True)
class MinedSequence:
    """A recurring template n-gram with its frequency and average gaps."""

    templates: tuple[str, ...]
    support: int
    avg_gaps: tuple[float, ...]


def mine_sequences(
    log: list[LogEntry],
    min_support: int,
    max_len: int = 4,
    max_gap: float = 1000.0,
) -> list[MinedSequence]:
    """Count contiguous template n-grams (2 <= n <= max_len) in the log.

    Windows are broken wherever a completion-to-arrival gap exceeds
    ``max_gap``.  Results carry per-position average gaps and are sorted by
    support (descending), length (descending), then template ids.
    """
    if min_support < 1:
        raise MiningError(f"min_support must be >= 1, got {min_support}")
    if max_len < 2:
        raise MiningError(f"max_len must be >= 2, got {max_len}")
    for a, b in zip(log, log[1:]):
        if b.timestamp_ms < a.timestamp_ms:
            raise MiningError("log is not sorted by timestamp")

    templates = [fingerprint(e.text) for e in log]
    gap_after = [
        max(0.0, b.timestamp_ms - (a.timestamp_ms + (a.duration_ms or 0.0)))
        for a, b in zip(log, log[1:])
    ]

    counts: dict[tuple[str, ...], tuple[int, list[float]]] = {}
    for n in range(2, max_len + 1):
        for i in range(len(log) - n + 1):
            window_gaps = gap_after[i : i + n - 1]
            if any(g > max_gap for g in window_gaps):
                continue
            key = tuple(templates[i : i + n])
            support, sums = counts.get(key, (0, [0.0] * (n - 1)))
            counts[key] = (support + 1, [s + g for s, g in zip(sums, window_gaps)])

    mined = [
        MinedSequence(
            templates=key,
            support=support,
            avg_gaps=tuple(s / support for s in sums),
        )
        for key, (support, sums) in counts.items()
        if support >= min_support
    ]
    mined.sort(key=lambda m: (-m.support, -len(m.templates), m.templates))
    return mined


@dataclass(frozen=True)
class CatalogEntry:
    """What a template means to the cost model: its table and operators."""

    table: TableSpec
    ops: tuple[FilterOp, ...]


def to_workload(mined: MinedSequence, catalog: Mapping[str, CatalogEntry]) -> QuerySequence:
    """Turn a mined sequence into a runnable workload via a template catalog."""
    missing = [tid for tid in mined.templates if tid not in catalog]
    if missing:
        raise MiningError(f"catalog missing template(s): {missing}")
    queries = tuple(
        Query(id=f"Q{i}", table=catalog[tid].table, ops=tuple(catalog[tid].ops))
        for i, tid in enumerate(mined.templates)
    )
    return require_valid(QuerySequence(queries=queries, gaps=mined.avg_gaps))


def report_csv(mined: list[MinedSequence]) -> str:
    """Mining report: one row per recurring sequence."""
    lines = ["templates,support,avg_gaps_ms"]
    for m in mined:
        gaps = "|".join(f"{g:.6f}" for g in m.avg_gaps)
        lines.append(f"{'|'.join(m.templates)},{m.support},{gaps}")
    return "\n".join(lines) + "\n"


def parse_catalog(doc: object) -> dict[str, CatalogEntry]:
    """Decode a template catalog document (template id -> table + ops)."""
    if not isinstance(doc, dict):
        raise MiningError("catalog must be an object mapping template ids")
    out: dict[str, CatalogEntry] = {}
    for tid, entry in doc.items():
        if not isinstance(entry, dict) or set(entry) != {"table", "ops"}:
            raise MiningError(f"catalog[{tid!r}] must have exactly 'table' and 'ops'")
        table = entry["table"]
        if not isinstance(table, dict) or set(table) != {"name", "size_mb"}:
            raise MiningError(f"catalog[{tid!r}].table must have 'name' and 'size_mb'")
        ops = entry["ops"]
        if not isinstance(ops, list) or not ops:
            raise MiningError(f"catalog[{tid!r}].ops must be a non-empty array")
        parsed_ops = []
        for j, op in enumerate(ops):
            if not isinstance(op, dict) or not {"id", "selectivity"} <= set(op) <= {"id", "selectivity", "commutes"}:
                raise MiningError(f"catalog[{tid!r}].ops[{j}] must have 'id' and 'selectivity'")
            parsed_ops.append(
                FilterOp(id=str(op["id"]), selectivity=float(op["selectivity"]),
                         commutes=bool(op.get("commutes", True)))
            )
        out[tid] = CatalogEntry(
            table=TableSpec(name=str(table["name"]), size_mb=float(table["size_mb"])),
            ops=tuple(parsed_ops),
        )
    return out
