"""Workload documents: the JSON form of a sequence plus device profile."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import WorkloadFormatError
from .model import (
    DeviceProfile,
    FilterOp,
    Query,
    QuerySequence,
    TableSpec,
    calibrated_profile,
)

_PROFILE_KEYS = {
    "t_reconfig_ms": "t_reconfig",
    "r_scan_mb_per_ms": "r_scan",
    "r_acc_mb_per_ms": "r_acc",
    "r_network_mb_per_ms": "r_network",
    "c_dbms_ms_per_mb": "c_dbms",
}


def _require_keys(obj: Any, allowed: set[str], required: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise WorkloadFormatError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise WorkloadFormatError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise WorkloadFormatError(f"{where}: missing key(s) {sorted(missing)}")
    return obj


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WorkloadFormatError(f"{where} must be a number, got {value!r}")
    return float(value)


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise WorkloadFormatError(f"{where} must be a string, got {value!r}")
    return value


def parse_workload(doc: Any) -> tuple[QuerySequence, DeviceProfile]:
    """Build a sequence and profile from a decoded workload document.

    Unknown keys are rejected at every level; a missing ``profile`` section
    falls back to :func:`calibrated_profile`.  Model invariants (gap counts,
    selectivity ranges, ...) are left to ``validate_sequence``.
    """
    _require_keys(doc, {"profile", "tables", "queries", "sequence"},
                  {"tables", "queries", "sequence"}, "workload")

    if "profile" in doc:
        raw = _require_keys(doc["profile"], set(_PROFILE_KEYS), set(_PROFILE_KEYS), "profile")
        try:
            profile = DeviceProfile(**{
                attr: _number(raw[key], f"profile.{key}") for key, attr in _PROFILE_KEYS.items()
            })
        except ValueError as exc:
            raise WorkloadFormatError(str(exc)) from exc
    else:
        profile = calibrated_profile()

    if not isinstance(doc["tables"], list):
        raise WorkloadFormatError("tables must be an array")
    tables: dict[str, TableSpec] = {}
    for i, entry in enumerate(doc["tables"]):
        where = f"tables[{i}]"
        _require_keys(entry, {"name", "size_mb"}, {"name", "size_mb"}, where)
        name = _string(entry["name"], f"{where}.name")
        if name in tables:
            raise WorkloadFormatError(f"{where}: duplicate table name {name!r}")
        tables[name] = TableSpec(name=name, size_mb=_number(entry["size_mb"], f"{where}.size_mb"))

    if not isinstance(doc["queries"], list):
        raise WorkloadFormatError("queries must be an array")
    queries: dict[str, Query] = {}
    for i, entry in enumerate(doc["queries"]):
        where = f"queries[{i}]"
        _require_keys(entry, {"id", "table", "ops"}, {"id", "table", "ops"}, where)
        qid = _string(entry["id"], f"{where}.id")
        if qid in queries:
            raise WorkloadFormatError(f"{where}: duplicate query id {qid!r}")
        table_name = _string(entry["table"], f"{where}.table")
        if table_name not in tables:
            raise WorkloadFormatError(f"{where}: unknown table {table_name!r}")
        if not isinstance(entry["ops"], list):
            raise WorkloadFormatError(f"{where}.ops must be an array")
        ops = []
        for j, op in enumerate(entry["ops"]):
            owhere = f"{where}.ops[{j}]"
            _require_keys(op, {"id", "selectivity", "commutes"}, {"id", "selectivity"}, owhere)
            commutes = op.get("commutes", True)
            if not isinstance(commutes, bool):
                raise WorkloadFormatError(f"{owhere}.commutes must be a boolean")
            ops.append(
                FilterOp(
                    id=_string(op["id"], f"{owhere}.id"),
                    selectivity=_number(op["selectivity"], f"{owhere}.selectivity"),
                    commutes=commutes,
                )
            )
        queries[qid] = Query(id=qid, table=tables[table_name], ops=tuple(ops))

    seq_doc = _require_keys(doc["sequence"], {"order", "gaps_ms"}, {"order", "gaps_ms"}, "sequence")
    if not isinstance(seq_doc["order"], list) or not isinstance(seq_doc["gaps_ms"], list):
        raise WorkloadFormatError("sequence.order and sequence.gaps_ms must be arrays")
    ordered = []
    for i, qid in enumerate(seq_doc["order"]):
        qid = _string(qid, f"sequence.order[{i}]")
        if qid not in queries:
            raise WorkloadFormatError(f"sequence.order[{i}]: unknown query {qid!r}")
        ordered.append(queries[qid])
    gaps = tuple(_number(g, f"sequence.gaps_ms[{i}]") for i, g in enumerate(seq_doc["gaps_ms"]))
    return QuerySequence(queries=tuple(ordered), gaps=gaps), profile


def load_workload(path: str | Path) -> tuple[QuerySequence, DeviceProfile]:
    """Read a workload JSON file; malformed JSON is a format error."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkloadFormatError(f"{path}: not valid JSON ({exc})") from exc
    return parse_workload(doc)


def workload_dict(seq: QuerySequence, profile: DeviceProfile | None = None) -> dict:
    """The JSON-ready document for a sequence (inverse of parse_workload)."""
    doc: dict[str, Any] = {}
    if profile is not None:
        doc["profile"] = {
            "t_reconfig_ms": profile.t_reconfig,
            "r_scan_mb_per_ms": profile.r_scan,
            "r_acc_mb_per_ms": profile.r_acc,
            "r_network_mb_per_ms": profile.r_network,
            "c_dbms_ms_per_mb": profile.c_dbms,
        }
    tables: dict[str, TableSpec] = {}
    for q in seq.queries:
        tables.setdefault(q.table.name, q.table)
    doc["tables"] = [{"name": t.name, "size_mb": t.size_mb} for t in tables.values()]
    doc["queries"] = [
        {
            "id": q.id,
            "table": q.table.name,
            "ops": [
                {"id": op.id, "selectivity": op.selectivity, **({} if op.commutes else {"commutes": False})}
                for op in q.ops
            ],
        }
        for q in seq.queries
    ]
    doc["sequence"] = {"order": [q.id for q in seq.queries], "gaps_ms": list(seq.gaps)}
    return doc


def save_workload(path: str | Path, seq: QuerySequence, profile: DeviceProfile | None = None) -> None:
    Path(path).write_text(json.dumps(workload_dict(seq, profile), indent=2) + "\n", encoding="utf-8")


def default_scenario(
    scale: float = 1.0,
    gap_ms: float = 1.0,
    selectivities: tuple[float, float, float] = (0.33, 0.43, 0.14),
) -> QuerySequence:
    """The built-in two-query reference workload.

    A 9 MB table filtered twice (sharing its first accelerator with the
    follow-up query) and a 1 MB table filtered once, 1 ms apart; both table
    sizes scale together.
    """
    f0, f1, f2 = selectivities
    t0 = TableSpec(name="t0", size_mb=9.0 * scale)
    t1 = TableSpec(name="t1", size_mb=1.0 * scale)
    q0 = Query(id="Q0", table=t0, ops=(FilterOp("acc0", f0), FilterOp("acc1", f1)))
    q1 = Query(id="Q1", table=t1, ops=(FilterOp("acc0", f2),))
    return QuerySequence(queries=(q0, q1), gaps=(gap_ms,))
