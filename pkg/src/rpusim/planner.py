"""Plan choice, hint generation, and the device-side reconfiguration policy.

The optimizer side enumerates the applicable strategy plans, costs them, and
picks the cheapest; with hints disabled, every strategy that needs advance
knowledge of the following query (II, III, IV) is off the table.  The device
side gets a much smaller decision: given a hint about the next query, either
swap the running query's filter order to keep the needed accelerator loaded,
or reload it speculatively during the transfer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .cost import CostBreakdown, PhaseTimes, plan_cost
from .model import (
    DeviceProfile,
    HINT_STRATEGIES,
    Plan,
    QuerySequence,
    STRATEGY_ORDER,
    require_valid,
)
from .plans import enumerate_plans, require_legal, shared_accelerators


@dataclass(frozen=True)
class Hint:
    """Advance notice of what the following query will ask of the device."""

    next_accelerators: tuple[str, ...]
    expected_gap: float
    expected_scan: float


@dataclass(frozen=True)
class RpuState:
    """What the single PR currently holds (None when nothing is loaded)."""

    loaded: str | None = None


class ReconfigChoice(Enum):
    SPECULATIVE_LOAD = "SPECULATIVE_LOAD"
    SWAP = "SWAP"
    NONE = "NONE"


@dataclass(frozen=True)
class ReconfigDecision:
    choice: ReconfigChoice
    rationale: dict[str, float] = field(default_factory=dict)


def choose_plan(
    seq: QuerySequence,
    profile: DeviceProfile,
    hints_enabled: bool = True,
) -> tuple[Plan, CostBreakdown]:
    """The cheapest applicable plan for the sequence.

    Ties break on strategy order (S < I < II < III < IV), so results are
    reproducible.  Disabling hints removes strategies II, III, and IV from
    the candidate set.
    """
    require_valid(seq)
    candidates = enumerate_plans(seq)
    if not hints_enabled:
        candidates = [p for p in candidates if p.strategy not in HINT_STRATEGIES]
    best: tuple[float, int] | None = None
    chosen: tuple[Plan, CostBreakdown] | None = None
    for plan in candidates:
        breakdown = plan_cost(seq, plan, profile)
        rank = (breakdown.total, STRATEGY_ORDER.index(plan.strategy))
        if best is None or rank < best:
            best = rank
            chosen = (plan, breakdown)
    assert chosen is not None  # strategy S always applies
    return chosen


def generate_hints(seq: QuerySequence, plan: Plan, profile: DeviceProfile) -> list[Hint]:
    """One hint per adjacent pair that shares at least one accelerator.

    Each hint names the shared accelerators in the successor's streaming
    order and carries the pair's expected gap and the successor's scan-time
    estimate.
    """
    require_valid(seq)
    require_legal(plan, seq)
    shared = shared_accelerators(seq)
    hints: list[Hint] = []
    for i, (pred, succ) in enumerate(zip(seq.queries, seq.queries[1:])):
        common = set(shared[(pred.id, succ.id)])
        if not common:
            continue
        ordered = [op_id for op_id in plan.rpu_order[succ.id] if op_id in common]
        ordered += [op_id for op_id in shared[(pred.id, succ.id)] if op_id not in ordered]
        hints.append(
            Hint(
                next_accelerators=tuple(ordered),
                expected_gap=seq.gaps[i],
                expected_scan=succ.table.size_mb / profile.r_scan,
            )
        )
    return hints


def rpu_policy(
    hint: Hint | None,
    state: RpuState,
    q0_phase: PhaseTimes,
    profile: DeviceProfile,
    *,
    swap_legal: bool = True,
) -> ReconfigDecision:
    """Swap or speculatively reload, judged from the running query's numbers.

    Swapping wins when the reload could not be hidden anyway: when transfer +
    expected gap + the next query's scan fit inside one reconfiguration time.
    ``state`` does not enter the inequality (the running query overwrites
    the PR regardless of what it held before), but callers thread it so the
    decision point has the full device picture.  ``swap_legal`` is the
    commutation check for the running query's operators; an illegal swap
    falls back to the speculative reload.
    """
    if hint is None or not hint.next_accelerators:
        return ReconfigDecision(choice=ReconfigChoice.NONE)
    lhs = q0_phase.trans + hint.expected_gap + hint.expected_scan
    rationale = {
        "t_trans": q0_phase.trans,
        "expected_gap": hint.expected_gap,
        "expected_scan": hint.expected_scan,
        "lhs": lhs,
        "t_reconfig": profile.t_reconfig,
    }
    if lhs <= profile.t_reconfig and swap_legal:
        return ReconfigDecision(choice=ReconfigChoice.SWAP, rationale=rationale)
    return ReconfigDecision(choice=ReconfigChoice.SPECULATIVE_LOAD, rationale=rationale)
