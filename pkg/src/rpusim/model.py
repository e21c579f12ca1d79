"""Domain types for query sequences on a reconfigurable streaming accelerator.

The model describes an RPU: a storage-attached device with a single partially
reconfigurable region (PR) that holds one filter accelerator at a time.
Tables stream from storage through the loaded accelerator(s) and over the
network to the host DBMS, which finishes whatever operators were not pushed
down.  Everything here is immutable value data.

Unit conventions (uniform across the package):

* time: milliseconds (float)
* data size: megabytes, 1 MB = 10^6 bytes (float)
* data rate: MB/ms (so 1 GB/s == 1 MB/ms exactly)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidSequenceError


class Strategy(Enum):
    """The five sequence-plan shapes, in canonical (tie-break) order.

    S    full pushdown of every operator, no lookahead: the device
         reconfigures on demand for each operator and again when the next
         query arrives.
    I    push down only the first operator of each non-final query; the rest
         run on the host, so the loaded accelerator survives into the next
         query.
    II   push down only the second operator; the reload the next query needs
         runs in parallel with the result transfer, host filtering, and gap.
    III  full pushdown plus a speculative reload of the next query's
         accelerator, started the moment the current query's last
         accelerator finishes.
    IV   full pushdown with the current query's filter order swapped so the
         accelerator the next query needs is the one left loaded.
    """

    S = "S"
    I = "I"  # noqa: E741 - strategy names are the domain vocabulary
    II = "II"
    III = "III"
    IV = "IV"

    def __str__(self) -> str:
        return self.value


STRATEGY_ORDER = (Strategy.S, Strategy.I, Strategy.II, Strategy.III, Strategy.IV)

#: Strategies that need advance knowledge of the following query, either to
#: pre-position an accelerator (II, III) or to reorder the running query (IV).
HINT_STRATEGIES = frozenset({Strategy.II, Strategy.III, Strategy.IV})


class Placement(Enum):
    """Where an operator executes."""

    RPU = "RPU"
    HOST = "HOST"


@dataclass(frozen=True)
class DeviceProfile:
    """Calibrated rates and reconfiguration time of the modeled device chain.

    All fields must be strictly positive.
    """

    t_reconfig: float  # ms to load one accelerator into the PR
    r_scan: float      # MB/ms storage scan rate
    r_acc: float       # MB/ms accelerator streaming rate
    r_network: float   # MB/ms device-to-host transfer rate
    c_dbms: float      # ms per MB of input for a host-side filter

    def __post_init__(self) -> None:
        for name in ("t_reconfig", "r_scan", "r_acc", "r_network", "c_dbms"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"DeviceProfile.{name} must be > 0, got {value!r}")


def calibrated_profile() -> DeviceProfile:
    """The measured reference device.

    15 ms reconfiguration, 1 GB/s scan, 1.5 GB/s accelerator streaming,
    80 MB/s network, 0.03 ms host filtering per MB of input.
    """
    return DeviceProfile(
        t_reconfig=15.0,
        r_scan=1.0,
        r_acc=1.5,
        r_network=0.08,
        c_dbms=0.03,
    )


@dataclass(frozen=True)
class TableSpec:
    """A scanned table: just a name and a size in MB (size >= 0)."""

    name: str
    size_mb: float


@dataclass(frozen=True)
class FilterOp:
    """One filter operator and the accelerator implementing it.

    ``id`` doubles as the accelerator identity: two queries whose operators
    carry the same id can reuse one loaded accelerator.  ``selectivity`` is
    the output/input size ratio in [0, 1].  ``commutes`` says whether the
    filter may be reordered against other filters.
    """

    id: str
    selectivity: float
    commutes: bool = True


@dataclass(frozen=True)
class Query:
    """An ordered list of filters over one table."""

    id: str
    table: TableSpec
    ops: tuple[FilterOp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))

    def op_ids(self) -> tuple[str, ...]:
        return tuple(op.id for op in self.ops)


@dataclass(frozen=True)
class QuerySequence:
    """Queries in arrival order plus the average gap before each successor.

    ``gaps[i]`` is the average time between completion of ``queries[i]``
    (result fully delivered, host post-processing done) and the arrival of
    ``queries[i + 1]``.
    """

    queries: tuple[Query, ...]
    gaps: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "queries", tuple(self.queries))
        object.__setattr__(self, "gaps", tuple(float(g) for g in self.gaps))

    def query(self, query_id: str) -> Query:
        for q in self.queries:
            if q.id == query_id:
                return q
        raise KeyError(query_id)


@dataclass(frozen=True)
class Violation:
    """One broken invariant: where it was found and what is wrong."""

    location: str
    message: str


def validate_sequence(seq: QuerySequence) -> list[Violation]:
    """Check every model invariant of a sequence; empty result means ok.

    Violations are data, not exceptions, so callers can report all of them
    at once.  Use :func:`require_valid` to raise instead.
    """
    out: list[Violation] = []
    n = len(seq.queries)
    if n < 2:
        out.append(Violation("sequence.queries", f"sequence needs >= 2 queries, got {n}"))
    if len(seq.gaps) != max(n - 1, 0):
        out.append(
            Violation(
                "sequence.gaps",
                f"gap count {len(seq.gaps)} does not match queries - 1 = {n - 1}",
            )
        )
    for i, g in enumerate(seq.gaps):
        if g < 0:
            out.append(Violation(f"sequence.gaps[{i}]", f"negative gap {g}"))

    seen_ids: set[str] = set()
    for qi, q in enumerate(seq.queries):
        loc = f"queries[{qi}]"
        if q.id in seen_ids:
            out.append(Violation(loc, f"duplicate query id {q.id!r} in sequence"))
        seen_ids.add(q.id)
        if q.table.size_mb < 0:
            out.append(Violation(f"{loc}.table", f"negative table size {q.table.size_mb}"))
        if not q.ops:
            out.append(Violation(f"{loc}.ops", "query has no operators"))
        op_ids: set[str] = set()
        for oi, op in enumerate(q.ops):
            oloc = f"{loc}.ops[{oi}]"
            if op.id in op_ids:
                out.append(Violation(oloc, f"duplicate op id {op.id!r} within query"))
            op_ids.add(op.id)
            if not 0.0 <= op.selectivity <= 1.0:
                out.append(
                    Violation(f"{oloc}.selectivity", f"selectivity range: {op.selectivity} outside [0, 1]")
                )
    return out


def require_valid(seq: QuerySequence) -> QuerySequence:
    """Raise :class:`InvalidSequenceError` unless the sequence is clean."""
    violations = validate_sequence(seq)
    if violations:
        raise InvalidSequenceError(violations)
    return seq


@dataclass(frozen=True)
class SpeculativeLoad:
    """A reconfiguration started ahead of need (strategy III).

    The PR starts loading ``accelerator`` as soon as ``after_op`` of query
    ``query_id`` finishes executing, i.e. the moment the PR goes idle.
    """

    query_id: str
    after_op: str
    accelerator: str


@dataclass(frozen=True)
class Plan:
    """A concrete executable choice for a whole sequence.

    ``placements`` maps query id -> op id -> :class:`Placement`;
    ``rpu_order`` gives, per query, the order in which its RPU-placed
    operators stream.  ``speculative_loads`` is only populated for
    strategy III.
    """

    strategy: Strategy
    placements: dict[str, dict[str, Placement]]
    rpu_order: dict[str, tuple[str, ...]]
    speculative_loads: tuple[SpeculativeLoad, ...] = field(default_factory=tuple)

    def rpu_ops(self, query: Query) -> tuple[FilterOp, ...]:
        """The query's RPU-placed operators, in streaming order."""
        by_id = {op.id: op for op in query.ops}
        return tuple(by_id[op_id] for op_id in self.rpu_order.get(query.id, ()))

    def host_ops(self, query: Query) -> tuple[FilterOp, ...]:
        """The query's host-placed operators, in declared order."""
        placed = self.placements.get(query.id, {})
        return tuple(op for op in query.ops if placed.get(op.id) is Placement.HOST)

    def load_after(self, query_id: str, op_id: str) -> SpeculativeLoad | None:
        for load in self.speculative_loads:
            if load.query_id == query_id and load.after_op == op_id:
                return load
        return None
