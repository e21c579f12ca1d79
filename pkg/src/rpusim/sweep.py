"""Parameter sweeps: cost every strategy across a grid of scenario variants."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .cost import improvement, plan_cost
from .model import DeviceProfile, FilterOp, Query, QuerySequence, Strategy, require_valid
from .plans import strategy_plan

VARIABLES = ("scale", "selectivity", "gap")


def scale_sequence(seq: QuerySequence, factor: float) -> QuerySequence:
    """All table sizes multiplied by ``factor``."""
    if factor < 0:
        raise ValueError(f"scale factor must be >= 0, got {factor}")
    queries = tuple(
        replace(q, table=replace(q.table, size_mb=q.table.size_mb * factor))
        for q in seq.queries
    )
    return QuerySequence(queries=queries, gaps=seq.gaps)


def set_selectivity(seq: QuerySequence, selectivity: float) -> QuerySequence:
    """Every operator's selectivity replaced by one common value."""
    if not 0.0 <= selectivity <= 1.0:
        raise ValueError(f"selectivity must be in [0, 1], got {selectivity}")
    queries = tuple(
        Query(
            id=q.id,
            table=q.table,
            ops=tuple(FilterOp(op.id, selectivity, op.commutes) for op in q.ops),
        )
        for q in seq.queries
    )
    return QuerySequence(queries=queries, gaps=seq.gaps)


def set_gaps(seq: QuerySequence, gap_ms: float) -> QuerySequence:
    """Every inter-query gap replaced by one common value."""
    if gap_ms < 0:
        raise ValueError(f"gap must be >= 0, got {gap_ms}")
    return QuerySequence(queries=seq.queries, gaps=(gap_ms,) * len(seq.gaps))


_TRANSFORMS = {
    "scale": scale_sequence,
    "selectivity": set_selectivity,
    "gap": set_gaps,
}


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable over an inclusive range, for a set of strategies."""

    variable: str
    start: float
    stop: float
    steps: int
    strategies: tuple[Strategy, ...]

    def __post_init__(self) -> None:
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}, got {self.variable!r}")
        if not self.start <= self.stop:
            raise ValueError(f"invalid range: from {self.start} > to {self.stop}")
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        if not self.strategies:
            raise ValueError("strategies must not be empty")

    def grid(self) -> list[float]:
        step = (self.stop - self.start) / (self.steps - 1)
        return [self.start + i * step for i in range(self.steps)]


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    strategy: Strategy
    total_ms: float
    improvement_pct: float


def run_sweep(seq: QuerySequence, profile: DeviceProfile, spec: SweepSpec) -> list[SweepRow]:
    """Evaluate each strategy at every grid point, improvements vs S."""
    require_valid(seq)
    transform = _TRANSFORMS[spec.variable]
    rows: list[SweepRow] = []
    for value in spec.grid():
        variant = transform(seq, value)
        baseline = plan_cost(variant, strategy_plan(variant, Strategy.S), profile)
        for strategy in spec.strategies:
            if strategy is Strategy.S:
                breakdown = baseline
            else:
                breakdown = plan_cost(variant, strategy_plan(variant, strategy), profile)
            rows.append(
                SweepRow(
                    variable=spec.variable,
                    value=value,
                    strategy=strategy,
                    total_ms=breakdown.total,
                    improvement_pct=improvement(breakdown, baseline),
                )
            )
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = ["variable,value,strategy,total_ms,improvement_pct"]
    for r in rows:
        lines.append(
            f"{r.variable},{r.value:.6f},{r.strategy},{r.total_ms:.6f},{r.improvement_pct:.6f}"
        )
    return "\n".join(lines) + "\n"
