"""Command-line harness: cost tables, plan choice, simulation, sweeps, mining.

Exit codes: 0 on success, 1 when inputs fail validation, 2 on I/O errors.
CSV outputs are deterministic byte-for-byte for fixed inputs; human-readable
numbers are printed with 3 decimals.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cost import improvement, plan_cost
from .errors import RpusimError
from .miner import (
    fingerprint,
    mine_sequences,
    normalize_query,
    parse_catalog,
    parse_log,
    report_csv,
    to_workload,
)
from .model import DeviceProfile, QuerySequence, Strategy, calibrated_profile, require_valid
from .planner import choose_plan, generate_hints
from .plans import enumerate_plans, strategy_plan
from .simulate import simulate, timeline_csv
from .sweep import SweepSpec, run_sweep, scale_sequence, set_gaps, set_selectivity, sweep_csv
from .workload import default_scenario, load_workload, save_workload


def _parse_strategy(value: str) -> Strategy:
    try:
        return Strategy(value)
    except ValueError:
        raise ValueError(f"unknown strategy {value!r}; expected S, I, II, III, IV") from None


def _load(args) -> tuple[QuerySequence, DeviceProfile]:
    if args.workload:
        seq, profile = load_workload(args.workload)
    else:
        seq, profile = default_scenario(), calibrated_profile()
    require_valid(seq)
    return seq, profile


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_cost(args) -> int:
    seq, profile = _load(args)
    if args.strategy != "auto":
        plan = strategy_plan(seq, _parse_strategy(args.strategy))
        breakdown = plan_cost(seq, plan, profile)
        print(f"strategy: {plan.strategy}")
        print(f"total_ms: {breakdown.total:.3f}")
        for qid, t in breakdown.per_query:
            print(f"  {qid}: {t:.3f}")
        return 0
    baseline = plan_cost(seq, strategy_plan(seq, Strategy.S), profile)
    best = None
    for plan in enumerate_plans(seq):
        breakdown = plan_cost(seq, plan, profile)
        print(
            f"{str(plan.strategy):<4} total_ms {breakdown.total:>10.3f}  "
            f"improvement_pct {improvement(breakdown, baseline):>8.3f}"
        )
        if best is None or breakdown.total < best[1].total:
            best = (plan, breakdown)
    print(f"best: {best[0].strategy} ({best[1].total:.3f} ms)")
    return 0


def _cmd_plan(args) -> int:
    seq, profile = _load(args)
    plan, breakdown = choose_plan(seq, profile, hints_enabled=args.hints)
    print(f"strategy: {plan.strategy}")
    print(f"total_ms: {breakdown.total:.3f}")
    for qid, t in breakdown.per_query:
        print(f"  {qid}: {t:.3f}")
    for hint in generate_hints(seq, plan, profile):
        accs = ",".join(hint.next_accelerators)
        print(
            f"hint: next_accelerators={accs} expected_gap_ms={hint.expected_gap:.3f} "
            f"expected_scan_ms={hint.expected_scan:.3f}"
        )
    return 0


def _cmd_simulate(args) -> int:
    seq, profile = _load(args)
    if args.strategy == "auto":
        plan, _ = choose_plan(seq, profile, hints_enabled=args.hints)
    else:
        plan = strategy_plan(seq, _parse_strategy(args.strategy))
    timeline = simulate(seq, plan, profile)
    print(f"strategy: {plan.strategy}")
    print(f"makespan_ms: {timeline.makespan:.3f}")
    if args.timeline:
        Path(args.timeline).write_text(timeline_csv(timeline), encoding="utf-8")
        print(f"timeline: {args.timeline}")
    return 0


def _cmd_sweep(args) -> int:
    seq, profile = _load(args)
    if args.fix_scale is not None:
        seq = scale_sequence(seq, args.fix_scale)
    if args.fix_selectivity is not None:
        seq = set_selectivity(seq, args.fix_selectivity)
    if args.fix_gap is not None:
        seq = set_gaps(seq, args.fix_gap)
    strategies = tuple(_parse_strategy(s.strip()) for s in args.strategies.split(","))
    spec = SweepSpec(
        variable=args.sweep,
        start=args.start,
        stop=args.stop,
        steps=args.steps,
        strategies=strategies,
    )
    rows = run_sweep(seq, profile, spec)
    _write(args.out, sweep_csv(rows))
    return 0


def _cmd_mine(args) -> int:
    log = parse_log(args.log)
    mined = mine_sequences(
        log, min_support=args.min_support, max_len=args.max_len, max_gap=args.max_gap
    )
    _write(args.out, report_csv(mined))
    if args.out:
        print(f"report: {args.out} ({len(mined)} sequences)")
    seen: dict[str, str] = {}
    for entry in log:
        tid = fingerprint(entry.text)
        if tid not in seen:
            seen[tid] = normalize_query(entry.text)
    used = {tid for m in mined for tid in m.templates}
    for tid in seen:
        if tid in used:
            print(f"template {tid}: {seen[tid]}")
    if args.workload_out:
        if not args.catalog:
            raise ValueError("--workload-out requires --catalog")
        catalog = parse_catalog(json.loads(Path(args.catalog).read_text(encoding="utf-8")))
        if not mined:
            raise ValueError("no recurring sequence found, nothing to emit")
        seq = to_workload(mined[0], catalog)
        save_workload(args.workload_out, seq)
        print(f"workload: {args.workload_out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpusim",
        description="Cost, plan, and simulate query sequences on a reconfigurable accelerator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, strategy=False):
        p.add_argument("--workload", help="workload JSON file (default: built-in scenario)")
        p.add_argument(
            "--hints",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="allow strategies that need knowledge of upcoming queries",
        )
        if strategy:
            p.add_argument(
                "--strategy",
                default="auto",
                choices=["S", "I", "II", "III", "IV", "auto"],
                help="plan strategy, or auto to pick the cheapest",
            )

    p = sub.add_parser("cost", help="analytic cost of one or all strategies")
    common(p, strategy=True)
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("plan", help="choose the cheapest plan and print its hints")
    common(p)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("simulate", help="simulate a plan and export its timeline")
    common(p, strategy=True)
    p.add_argument("--timeline", help="write the phase timeline CSV here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="cost strategies across a parameter grid")
    common(p)
    p.add_argument("--sweep", required=True, choices=["scale", "selectivity", "gap"])
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--strategies", default="I,II,III,IV", help="comma-separated subset")
    p.add_argument("--fix-scale", type=float, help="pre-scale table sizes")
    p.add_argument("--fix-selectivity", type=float, help="pre-set all selectivities")
    p.add_argument("--fix-gap", type=float, help="pre-set all gaps (ms)")
    p.add_argument("--out", help="CSV output file (default: stdout)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("mine", help="mine recurring sequences from a query log")
    p.add_argument("--log", required=True, help="log file: epoch_ms<TAB>text[<TAB>duration_ms]")
    p.add_argument("--min-support", type=int, default=2)
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--max-gap", type=float, default=1000.0)
    p.add_argument("--out", help="report CSV file (default: stdout)")
    p.add_argument("--catalog", help="template catalog JSON for workload emission")
    p.add_argument("--workload-out", help="write the top sequence as a workload JSON")
    p.set_defaults(func=_cmd_mine)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RpusimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
