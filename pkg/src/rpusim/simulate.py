"""Event-driven execution of a plan on the single-PR device model.

The simulator turns a plan into phases on four resources plus an idle lane
for gaps, releases them through a time-ordered event queue, and reports the
resulting timeline.  Scheduling rules:

* the table scan may run while the PR is being reconfigured;
* an accelerator starts only once its reconfiguration, the query's scan, and
  any preceding accelerator of the same query have finished;
* the PR is exclusive: reconfiguration never overlaps accelerator execution;
* the result transfer follows the query's last accelerator (or the scan when
  nothing was pushed down), host filtering follows the transfer;
* a reconfiguration may run during transfers and gaps: in strategies II and
  III the reload the next query needs is released the moment the PR goes
  idle, instead of at that query's arrival.  Strategy II holds the next
  query until the PR is ready; strategy III lets its scan proceed and gates
  only its accelerator;
* a query arrives its gap after the predecessor's completion.

Zero-length phases are processed for their ordering effects but omitted
from the emitted timeline.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from enum import Enum

from .errors import SchedulingError
from .model import (
    DeviceProfile,
    Plan,
    QuerySequence,
    Strategy,
    Violation,
    require_valid,
)
from .plans import require_legal

#: Query column placeholder for phases that belong to no query.
GAP_QUERY = "\u2014"


class Resource(Enum):
    SCAN = "SCAN"
    PR = "PR"
    NET = "NET"
    DBMS = "DBMS"
    IDLE = "IDLE"


#: Event tie-break ranks: reconfiguration completions are processed first.
_RANK = {"reconfig": 0, "scan": 1, "acc-exec": 2, "transfer": 3, "dbms": 4, "gap": 5}


@dataclass(frozen=True)
class Phase:
    resource: Resource
    label: str
    query: str
    start: float
    end: float


@dataclass(frozen=True)
class Timeline:
    phases: tuple[Phase, ...]
    makespan: float


@dataclass(frozen=True)
class _Task:
    key: str
    resource: Resource
    label: str
    query: str
    duration: float
    deps: tuple[str, ...]
    qidx: int


def _build_tasks(seq: QuerySequence, plan: Plan, profile: DeviceProfile) -> list[_Task]:
    tasks: list[_Task] = []

    def add(key, resource, label, query, duration, deps, qidx):
        tasks.append(_Task(key, resource, label, query, duration, tuple(deps), qidx))
        return key

    strategy = plan.strategy
    loaded: str | None = None
    prev_completion: str | None = None
    prev_pr_free: str | None = None
    prev_query = None

    for i, q in enumerate(seq.queries):
        rpu = plan.rpu_ops(q)
        host = plan.host_ops(q)

        arrival_dep: list[str] = []
        if i > 0:
            gap_key = add(
                f"gap/{i - 1}", Resource.IDLE, "gap", GAP_QUERY,
                seq.gaps[i - 1], [prev_completion], i,
            )
            arrival_dep = [gap_key]

        # Pending speculative load from the predecessor (strategy III).
        load = None
        if prev_query is not None:
            pred_order = plan.rpu_order[prev_query.id]
            for cand in plan.speculative_loads:
                if cand.query_id != prev_query.id:
                    continue
                if not pred_order or cand.after_op != pred_order[-1]:
                    raise SchedulingError(
                        f"speculative load after op {cand.after_op!r} of query "
                        f"{prev_query.id!r} would start while the PR is still "
                        "needed by a later operator"
                    )
                load = cand

        lead_key: str | None = None
        overlap = False
        if rpu and loaded != rpu[0].id:
            if i > 0 and strategy is Strategy.II:
                overlap = True
            if load is not None:
                if load.accelerator != rpu[0].id:
                    raise SchedulingError(
                        f"speculative load of {load.accelerator!r} conflicts with "
                        f"the reconfiguration to {rpu[0].id!r} that query {q.id!r} needs"
                    )
                overlap = True
            deps = [] if i == 0 else ([prev_pr_free] if overlap else arrival_dep)
            lead_key = add(
                f"rec/{q.id}/{rpu[0].id}", Resource.PR, "reconfig", q.id,
                profile.t_reconfig, deps, i,
            )
        elif load is not None:
            raise SchedulingError(
                f"speculative load of {load.accelerator!r} is redundant: "
                "the accelerator is already loaded"
            )

        scan_deps = list(arrival_dep)
        if strategy is Strategy.II and overlap and lead_key is not None:
            scan_deps.append(lead_key)
        scan_key = add(
            f"scan/{q.id}", Resource.SCAN, "scan", q.id,
            q.table.size_mb / profile.r_scan, scan_deps, i,
        )

        size = q.table.size_mb
        prev_exec: str | None = None
        for k, op in enumerate(rpu):
            rec_key = None
            if k == 0:
                rec_key = lead_key
            elif loaded != op.id:
                rec_key = add(
                    f"rec/{q.id}/{op.id}", Resource.PR, "reconfig", q.id,
                    profile.t_reconfig, [prev_exec], i,
                )
            deps = [scan_key]
            if rec_key is not None:
                deps.append(rec_key)
            if prev_exec is not None:
                deps.append(prev_exec)
            prev_exec = add(
                f"acc/{q.id}/{op.id}", Resource.PR, "acc-exec", q.id,
                size / profile.r_acc, deps, i,
            )
            size *= op.selectivity
            loaded = op.id

        pr_free = prev_exec if prev_exec is not None else scan_key
        trans_key = add(
            f"trans/{q.id}", Resource.NET, "transfer", q.id,
            size / profile.r_network, [pr_free], i,
        )
        tail_key = trans_key
        for j, op in enumerate(host):
            tail_key = add(
                f"dbms/{q.id}/{op.id}", Resource.DBMS, "dbms", q.id,
                profile.c_dbms * size, [tail_key], i,
            )
            size *= op.selectivity

        prev_completion = tail_key
        prev_pr_free = pr_free
        prev_query = q
    return tasks


def _run_tasks(tasks: list[_Task]) -> dict[str, tuple[float, float]]:
    by_key = {t.key: t for t in tasks}
    waiting = {t.key: set(t.deps) for t in tasks}
    dependents: dict[str, list[str]] = {t.key: [] for t in tasks}
    for t in tasks:
        for dep in t.deps:
            dependents[dep].append(t.key)

    times: dict[str, tuple[float, float]] = {}
    free_at: dict[Resource, float] = {r: 0.0 for r in Resource}
    heap: list[tuple[float, int, int, int, str]] = []
    order = itertools.count()

    def start(task: _Task, at: float) -> None:
        if free_at[task.resource] > at:
            raise SchedulingError(
                f"{task.resource.value} is busy until {free_at[task.resource]:.6f} ms "
                f"when {task.label} for {task.query} is released at {at:.6f} ms"
            )
        end = at + task.duration
        times[task.key] = (at, end)
        free_at[task.resource] = end
        heapq.heappush(heap, (end, _RANK[task.label], task.qidx, next(order), task.key))

    for t in tasks:
        if not t.deps:
            start(t, 0.0)
    while heap:
        _, _, _, _, key = heapq.heappop(heap)
        for dep_key in dependents[key]:
            pending = waiting[dep_key]
            pending.discard(key)
            if not pending:
                task = by_key[dep_key]
                start(task, max(times[d][1] for d in task.deps))
    if len(times) != len(tasks):
        stuck = sorted(set(by_key) - set(times))
        raise SchedulingError(f"dependency cycle, tasks never released: {stuck}")
    return times


def simulate(seq: QuerySequence, plan: Plan, profile: DeviceProfile) -> Timeline:
    """Execute the plan and return its timeline (phases plus makespan)."""
    require_valid(seq)
    require_legal(plan, seq)
    tasks = _build_tasks(seq, plan, profile)
    times = _run_tasks(tasks)

    makespan = max((end for _, end in times.values()), default=0.0)
    phases = [
        Phase(t.resource, t.label, t.query, times[t.key][0], times[t.key][1])
        for t in tasks
        if times[t.key][1] > times[t.key][0]
    ]
    phases.sort(key=lambda p: (p.start, p.resource.value, p.end, p.label, p.query))
    return Timeline(phases=tuple(phases), makespan=makespan)


def validate_timeline(timeline: Timeline) -> list[Violation]:
    """Check a timeline's structural rules; empty result means ok."""
    out: list[Violation] = []
    phases = timeline.phases
    for i, p in enumerate(phases):
        if p.end < p.start:
            out.append(Violation(f"phases[{i}]", f"end {p.end} before start {p.start}"))

    by_resource: dict[Resource, list[Phase]] = {}
    for p in phases:
        by_resource.setdefault(p.resource, []).append(p)
    for resource, group in by_resource.items():
        group = sorted(group, key=lambda p: (p.start, p.end))
        for a, b in zip(group, group[1:]):
            if b.start < a.end:
                out.append(
                    Violation(
                        f"resource {resource.value}",
                        f"{resource.value} conflict: {a.label} [{a.start}, {a.end}) "
                        f"overlaps {b.label} [{b.start}, {b.end})",
                    )
                )

    recs = [p for p in phases if p.label == "reconfig"]
    execs = [p for p in phases if p.label == "acc-exec"]
    for r in recs:
        for e in execs:
            if r.start < e.end and e.start < r.end:
                out.append(
                    Violation(
                        "PR",
                        f"PR conflict: reconfig [{r.start}, {r.end}) overlaps "
                        f"acc-exec [{e.start}, {e.end})",
                    )
                )

    queries = {p.query for p in phases if p.query != GAP_QUERY}
    for qid in sorted(queries):
        mine = [p for p in phases if p.query == qid]
        scan_end = max((p.end for p in mine if p.label == "scan"), default=None)
        accs = sorted((p for p in mine if p.label == "acc-exec"), key=lambda p: p.start)
        trans = [p for p in mine if p.label == "transfer"]
        dbms = sorted((p for p in mine if p.label == "dbms"), key=lambda p: p.start)
        if scan_end is not None and accs and accs[0].start < scan_end:
            out.append(Violation(f"query {qid}", "acc-exec started before scan finished"))
        for a, b in zip(accs, accs[1:]):
            if b.start < a.end:
                out.append(Violation(f"query {qid}", "acc-exec phases overlap"))
        if trans:
            work_end = accs[-1].end if accs else scan_end
            if work_end is not None and trans[0].start < work_end:
                out.append(Violation(f"query {qid}", "transfer started before the last RPU phase"))
            if dbms and dbms[0].start < trans[-1].end:
                out.append(Violation(f"query {qid}", "dbms started before transfer finished"))

    max_end = max((p.end for p in phases), default=0.0)
    if timeline.makespan != max_end:
        out.append(
            Violation("makespan", f"makespan {timeline.makespan} != max phase end {max_end}")
        )
    return out


def timeline_csv(timeline: Timeline) -> str:
    """Render the timeline as CSV, sorted by start time then resource."""
    rows = sorted(timeline.phases, key=lambda p: (p.start, p.resource.value))
    lines = ["resource,label,query,start_ms,end_ms"]
    for p in rows:
        lines.append(f"{p.resource.value},{p.label},{p.query},{p.start:.6f},{p.end:.6f}")
    return "\n".join(lines) + "\n"
