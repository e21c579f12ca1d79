"""Query-sequence planning and simulation for a reconfigurable accelerator.

Models how sequences of filter queries execute on a storage-attached device
with one partially reconfigurable accelerator slot: five plan strategies with
closed-form costs, an event-driven simulator producing phase timelines, a
plan chooser driven by sequence knowledge ("hints"), and a query-log miner
that recovers recurring sequences and their inter-query gaps.
"""

from .cost import (
    AccStep,
    CostBreakdown,
    PhaseTimes,
    filtered_size,
    improvement,
    phase_times,
    plan_cost,
)
from .errors import (
    IllegalPlanError,
    InvalidSequenceError,
    MiningError,
    RpusimError,
    SchedulingError,
    WorkloadFormatError,
)
from .miner import (
    CatalogEntry,
    LogEntry,
    MinedSequence,
    fingerprint,
    mine_sequences,
    normalize_query,
    parse_catalog,
    parse_log,
    report_csv,
    to_workload,
)
from .model import (
    DeviceProfile,
    FilterOp,
    HINT_STRATEGIES,
    Placement,
    Plan,
    Query,
    QuerySequence,
    SpeculativeLoad,
    STRATEGY_ORDER,
    Strategy,
    TableSpec,
    Violation,
    calibrated_profile,
    require_valid,
    validate_sequence,
)
from .planner import (
    Hint,
    ReconfigChoice,
    ReconfigDecision,
    RpuState,
    choose_plan,
    generate_hints,
    rpu_policy,
)
from .plans import (
    enumerate_plans,
    legality,
    local_order,
    require_legal,
    shared_accelerators,
    strategy_plan,
)
from .simulate import (
    GAP_QUERY,
    Phase,
    Resource,
    Timeline,
    simulate,
    timeline_csv,
    validate_timeline,
)
from .sweep import (
    SweepRow,
    SweepSpec,
    run_sweep,
    scale_sequence,
    set_gaps,
    set_selectivity,
    sweep_csv,
)
from .workload import (
    default_scenario,
    load_workload,
    parse_workload,
    save_workload,
    workload_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AccStep",
    "CatalogEntry",
    "CostBreakdown",
    "DeviceProfile",
    "FilterOp",
    "GAP_QUERY",
    "HINT_STRATEGIES",
    "Hint",
    "IllegalPlanError",
    "InvalidSequenceError",
    "LogEntry",
    "MinedSequence",
    "MiningError",
    "Phase",
    "PhaseTimes",
    "Placement",
    "Plan",
    "Query",
    "QuerySequence",
    "ReconfigChoice",
    "ReconfigDecision",
    "Resource",
    "RpuState",
    "RpusimError",
    "STRATEGY_ORDER",
    "SchedulingError",
    "SpeculativeLoad",
    "Strategy",
    "SweepRow",
    "SweepSpec",
    "TableSpec",
    "Timeline",
    "Violation",
    "WorkloadFormatError",
    "calibrated_profile",
    "choose_plan",
    "default_scenario",
    "enumerate_plans",
    "filtered_size",
    "fingerprint",
    "generate_hints",
    "improvement",
    "legality",
    "load_workload",
    "local_order",
    "mine_sequences",
    "normalize_query",
    "parse_catalog",
    "parse_log",
    "parse_workload",
    "phase_times",
    "plan_cost",
    "report_csv",
    "require_legal",
    "require_valid",
    "rpu_policy",
    "run_sweep",
    "save_workload",
    "scale_sequence",
    "set_gaps",
    "set_selectivity",
    "shared_accelerators",
    "simulate",
    "strategy_plan",
    "sweep_csv",
    "timeline_csv",
    "to_workload",
    "validate_sequence",
    "validate_timeline",
    "workload_dict",
]
