"""Closed-form execution times for every plan strategy.

Phase durations are pure streaming arithmetic: a phase moving ``s`` MB
through a stage rated ``r`` MB/ms takes ``s / r`` ms, host filtering costs a
calibrated constant per MB of input, and each filter shrinks its stream by
its selectivity.

A sequence total is assembled left to right out of three kinds of segments:

* query head: the first reconfiguration (if the needed accelerator is not
  already loaded) runs in parallel with the table scan, so it contributes
  ``max(t_reconfig, t_scan)``; every further operator adds its own
  reconfiguration and execution serially, because the PR cannot reconfigure
  while an accelerator is executing.
* query tail: result transfer, then host-side filtering of whatever was not
  pushed down.
* pair boundary: the gap sits between the predecessor's completion and the
  successor's arrival.  In the baseline shape the successor's leading
  reconfiguration overlaps only its own scan.  Strategy II starts that
  reconfiguration the moment the predecessor's accelerator finishes, hiding
  it behind transfer + host work + gap, and the successor starts once the PR
  is ready.  Strategy III does the same but also lets the successor's scan
  run during the reload, hiding it behind transfer + gap + scan.

The per-query times are reported separately only for the strategies where
the total genuinely decomposes per query (S, I, IV).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import IllegalPlanError
from .model import (
    DeviceProfile,
    Placement,
    Plan,
    Query,
    QuerySequence,
    Strategy,
    require_valid,
)
from .plans import require_legal


def filtered_size(input_size: float, selectivity: float) -> float:
    """Output size (MB) of one filter over an input of ``input_size`` MB."""
    if input_size < 0:
        raise ValueError(f"input size must be >= 0, got {input_size!r}")
    if not 0.0 <= selectivity <= 1.0:
        raise ValueError(f"selectivity must be in [0, 1], got {selectivity!r}")
    return input_size * selectivity


@dataclass(frozen=True)
class AccStep:
    """One accelerator execution: identity, duration, and stream sizes."""

    op_id: str
    time_ms: float
    input_mb: float
    output_mb: float


@dataclass(frozen=True)
class PhaseTimes:
    """Data-dependent phase durations of one query under one placement.

    Reconfigurations are not included here; they depend on device state and
    are accounted for by :func:`plan_cost` / the simulator.
    """

    scan: float
    acc: tuple[AccStep, ...]
    trans: float
    dbms: float


def phase_times(
    query: Query,
    placements: Mapping[str, Placement],
    order: Sequence[str],
    profile: DeviceProfile,
) -> PhaseTimes:
    """Scan, per-accelerator, transfer, and host times for one query.

    ``order`` lists the RPU-placed operators in streaming order; host-placed
    operators run on the host in the query's declared order, each charged
    per MB of its own input.
    """
    ops_by_id = {op.id: op for op in query.ops}
    if set(placements) != set(ops_by_id):
        raise IllegalPlanError(
            f"placements for query {query.id!r} must cover its ops exactly"
        )
    if len(set(order)) != len(order):
        raise IllegalPlanError(f"duplicate op in RPU order for query {query.id!r}")
    rpu_ids = {op_id for op_id, p in placements.items() if p is Placement.RPU}
    for op_id in order:
        if op_id not in ops_by_id:
            raise IllegalPlanError(f"unknown op {op_id!r} in RPU order for query {query.id!r}")
        if op_id not in rpu_ids:
            raise IllegalPlanError(
                f"op {op_id!r} appears in the RPU order of query {query.id!r} "
                "but is placed on the host"
            )
    if set(order) != rpu_ids:
        raise IllegalPlanError(
            f"RPU order for query {query.id!r} must cover all RPU-placed ops"
        )

    scan = query.table.size_mb / profile.r_scan
    size = query.table.size_mb
    steps = []
    for op_id in order:
        op = ops_by_id[op_id]
        out = filtered_size(size, op.selectivity)
        steps.append(AccStep(op_id=op.id, time_ms=size / profile.r_acc, input_mb=size, output_mb=out))
        size = out
    trans = size / profile.r_network
    dbms = 0.0
    for op in query.ops:
        if placements[op.id] is Placement.HOST:
            dbms += profile.c_dbms * size
            size = filtered_size(size, op.selectivity)
    return PhaseTimes(scan=scan, acc=tuple(steps), trans=trans, dbms=dbms)


@dataclass(frozen=True)
class CostBreakdown:
    """Total sequence time and, where separable, the per-query times."""

    strategy: Strategy
    total: float
    per_query: tuple[tuple[str, float], ...] = field(default_factory=tuple)


_SEPARABLE = frozenset({Strategy.S, Strategy.I, Strategy.IV})


def plan_cost(seq: QuerySequence, plan: Plan, profile: DeviceProfile) -> CostBreakdown:
    """Total execution time of the sequence under the plan.

    The clock runs from the first query's arrival to the last query's
    completion (final transfer plus any host filtering), gaps included.
    """
    require_valid(seq)
    require_legal(plan, seq)

    queries = seq.queries
    strategy = plan.strategy
    if strategy is Strategy.III:
        for load in plan.speculative_loads:
            anchor_order = plan.rpu_order[load.query_id]
            if not anchor_order or anchor_order[-1] != load.after_op:
                raise IllegalPlanError(
                    "illegal plan: speculative load anchored before the "
                    f"last RPU op of query {load.query_id!r}"
                )
    total = 0.0
    per_query: list[tuple[str, float]] = []
    loaded: str | None = None
    prev_tail = 0.0

    for i, q in enumerate(queries):
        pt = phase_times(q, plan.placements[q.id], plan.rpu_order[q.id], profile)
        rpu = plan.rpu_ops(q)
        lead = profile.t_reconfig if rpu and loaded != rpu[0].id else 0.0
        head = max(lead, pt.scan) if rpu else pt.scan

        body = 0.0
        prev_acc: str | None = rpu[0].id if rpu else None
        for k, step in enumerate(pt.acc):
            if k > 0 and prev_acc != step.op_id:
                body += profile.t_reconfig
            body += step.time_ms
            prev_acc = step.op_id

        tail = pt.trans + pt.dbms

        if i == 0:
            total += head + body
        else:
            gap = seq.gaps[i - 1]
            pred = queries[i - 1]
            load = None
            pred_order = plan.rpu_order[pred.id]
            if pred_order:
                load = plan.load_after(pred.id, pred_order[-1])
            if strategy is Strategy.II:
                # Reload hidden behind transfer + host work + gap; the
                # successor starts once the PR is ready.
                total += max(lead, prev_tail + gap) + pt.scan + body
            elif load is not None:
                if not rpu or load.accelerator != rpu[0].id:
                    raise IllegalPlanError(
                        "illegal plan: speculative load must target the "
                        "accelerator the following query needs first"
                    )
                if lead == 0.0:
                    raise IllegalPlanError(
                        "illegal plan: redundant speculative load, accelerator already loaded"
                    )
                # Reload hidden behind transfer + gap + the successor's scan.
                total += max(lead, prev_tail + gap + pt.scan) + body
            else:
                total += prev_tail + gap + head + body
        per_query.append((q.id, head + body + tail))

        prev_tail = tail
        if rpu:
            loaded = rpu[-1].id
    total += prev_tail

    return CostBreakdown(
        strategy=strategy,
        total=total,
        per_query=tuple(per_query) if strategy in _SEPARABLE else (),
    )


def improvement(candidate: CostBreakdown, baseline: CostBreakdown) -> float:
    """Relative time saving of ``candidate`` over ``baseline``, in percent.

    Negative when the candidate is slower.
    """
    if not baseline.total > 0.0:
        raise ValueError(f"baseline total must be > 0, got {baseline.total!r}")
    return 100.0 * (1.0 - candidate.total / baseline.total)
