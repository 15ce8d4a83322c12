"""Command-line entry point: ``fuzzytcp {infer,prioritize,schedule,evaluate,elicit,validate}``."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import io as fio
from .elicitation import build_partition, validate_partition
from .errors import FuzzyTcpError
from .evaluation import compare, discovery_csv, report_to_dict, simulate
from .inference import DEFAULT_RESOLUTION, explain, monotonicity_report, plot_samples_csv, trace_to_dict
from .tcp import (
    EXECUTION_TIME,
    FAILURE_RATE,
    MODES,
    RUN_ONCE,
    dataset_order,
    plan_stats,
    prioritize,
    schedule,
    validate_plan,
)


def _sidecars(path: str) -> tuple[Path, Path]:
    """(delimited data path, figure path) for a ``--plot-out`` argument."""
    p = Path(path)
    if p.suffix.lower() == ".png":
        return p.with_suffix(".csv"), p
    return p, p.with_suffix(".png")


def _variable_name(arg: str) -> str:
    if "-" in arg or "_" in arg or arg.islower():
        return "".join(part.capitalize() for part in arg.replace("_", "-").split("-"))
    return arg


def _engine(args):
    return fio.build_engine(args.variables or (), args.rules, args.resolution)


def _dataset(args):
    path = getattr(args, "dataset_pos", None) or args.dataset
    return fio.load_dataset(path) if path else fio.default_dataset()


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_infer(args) -> int:
    engine = _engine(args)
    trace = engine.infer({EXECUTION_TIME: args.exec_time, FAILURE_RATE: args.failure_rate})
    if args.plot_out:
        from .plotting import plot_inference

        csv_path, png_path = _sidecars(args.plot_out)
        csv_path.write_text(plot_samples_csv(trace), encoding="utf-8")
        plot_inference(trace, engine, png_path)
    if args.format == "structured":
        _emit(trace_to_dict(trace))
    elif args.explain:
        print(explain(trace))
    else:
        print(f"{trace.output}: {trace.crisp_output:.4f} ({trace.output_term})")
    return 0


def cmd_prioritize(args) -> int:
    engine = _engine(args)
    ranked = prioritize(_dataset(args), engine)
    if args.format == "structured":
        _emit([{"rank": i, "id": p.test_id, "name": p.name, "raw_score": p.raw_score,
                "level": p.level, "promoted": p.promoted, "final_score": p.final_score,
                "final_level": p.final_level} for i, p in enumerate(ranked, 1)])
        return 0
    width = max(len(p.name) for p in ranked)
    print(f"{'rank':>4}  {'id':>3}  {'name':<{width}}  {'raw':>7}  {'final':>7}  {'level':<9}  promoted")
    for i, p in enumerate(ranked, 1):
        print(f"{i:>4}  {p.test_id:>3}  {p.name:<{width}}  {p.raw_score:7.2f}  {p.final_score:7.2f}  "
              f"{p.final_level:<9}  {'yes' if p.promoted else 'no'}")
    return 0


def cmd_schedule(args) -> int:
    engine = _engine(args)
    dataset = _dataset(args)
    ranked = prioritize(dataset, engine)
    if args.order == "dataset":
        ranked = dataset_order(dataset, ranked)
    plan = schedule(ranked, dataset, args.mode)
    if args.out:
        fio.save_plan(plan, dataset, args.out)
    count, seconds = plan_stats(plan, dataset)
    if args.format == "structured":
        _emit(fio.plan_to_dict(plan, dataset) | {"executed": count, "total_time": seconds})
        return 0
    print(f"mode: {plan.mode}  order: {args.order}")
    print(f"{'step':>4}  {'id':>3}  {'reason':<12}  {'time':>5}  {'cum':>6}  name")
    for row in fio.plan_rows(plan, dataset):
        print(f"{row['position']:>4}  {row['id']:>3}  {row['reason']:<12}  {row['exec_time']:>5g}  "
              f"{row['cumulative_time']:>6g}  {row['name']}")
    print(f"executed: {count}  total time: {seconds:g} s")
    return 0


def cmd_evaluate(args) -> int:
    dataset = _dataset(args)
    faults = fio.load_faults(args.faults)
    reports = []
    for path in args.plans:
        plan = fio.load_plan(path)
        reports.append(simulate(plan, dataset, faults, label=Path(path).stem))
    if args.plot_out:
        from .plotting import plot_discovery

        csv_path, png_path = _sidecars(args.plot_out)
        csv_path.write_text(discovery_csv(reports), encoding="utf-8")
        plot_discovery(reports, png_path)
    if args.format == "structured":
        _emit([report_to_dict(r) for r in reports])
    else:
        print(compare(reports))
    return 0


def cmd_elicit(args) -> int:
    name = _variable_name(args.var)
    templates = {v.name: v for v in fio.default_variables()}
    for p in args.variables or ():
        templates.update({v.name: v for v in fio.load_variables(p)})
    if name not in templates and not args.survey.endswith(".json"):
        raise FuzzyTcpError(f"unknown variable {args.var!r}; known: {', '.join(templates)}")
    survey = fio.load_survey(args.survey, templates.get(name))
    var = build_partition(survey)
    findings = validate_partition(var)
    doc = json.dumps(fio.variable_to_dict(var), indent=2)
    if args.out:
        fio.save_variable(var, args.out)
    else:
        print(doc)
    if args.plot_out:
        from .plotting import plot_variable

        plot_variable(var, _sidecars(args.plot_out)[1])
    for f in findings:
        print(f"finding: {f}", file=sys.stderr)
    return 1 if findings else 0


def cmd_validate(args) -> int:
    findings: list[str] = []
    try:
        engine = _engine(args)
    except FuzzyTcpError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for var in engine.variables.values():
        findings += [f"{var.name}: {f}" for f in validate_partition(var)]
    inputs = engine.input_names
    covered = {frozenset(r.antecedents) for r in engine.rules}
    for combo in itertools.product(*[[(n, t) for t in engine.variables[n].labels] for n in inputs]):
        if frozenset(combo) not in covered:
            findings.append("rule base: no rule for " + ", ".join(f"{n}={t}" for n, t in combo))
    dataset = None
    try:
        dataset = _dataset(args)
    except FuzzyTcpError as e:
        findings.append(f"dataset: {e}")
    if args.plan and dataset is not None:
        findings += [f"plan: {f}" for f in validate_plan(fio.load_plan(args.plan), dataset)]
    info = {}
    if args.grid_report and len(inputs) == 2:
        info = monotonicity_report(engine, FAILURE_RATE, EXECUTION_TIME)
    if args.format == "structured":
        _emit({"findings": findings, "monotonicity": info})
    else:
        for f in findings:
            print(f"finding: {f}")
        if info:
            print("monotonicity (informational): " + ", ".join(f"{k}={v:g}" for k, v in info.items()))
        if not findings:
            print("ok")
    return 1 if findings else 0


def _common(p: argparse.ArgumentParser, engine: bool = True) -> None:
    if engine:
        p.add_argument("--variables", action="append", metavar="PATH",
                       help="variable file overriding a default partition (repeatable)")
        p.add_argument("--rules", metavar="PATH", help="rule base file (default: bundled rule table)")
        p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION,
                       help="centroid sample count (default %(default)s)")
    p.add_argument("--format", choices=("text", "structured"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzytcp", description="Fuzzy-logic test case prioritization and prerequisite-aware scheduling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="priority of one (execution time, failure rate) pair")
    p.add_argument("exec_time", type=float)
    p.add_argument("failure_rate", type=float)
    p.add_argument("--explain", action="store_true", help="print the full inference trace")
    p.add_argument("--plot-out", metavar="PATH", help="write aggregate samples (CSV) and a figure (PNG)")
    _common(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("prioritize", help="rank a dataset")
    p.add_argument("dataset_pos", nargs="?", metavar="DATASET")
    p.add_argument("--dataset", metavar="PATH")
    _common(p)
    p.set_defaults(func=cmd_prioritize)

    p = sub.add_parser("schedule", help="prerequisite-respecting execution plan")
    p.add_argument("dataset_pos", nargs="?", metavar="DATASET")
    p.add_argument("--dataset", metavar="PATH")
    p.add_argument("--mode", choices=MODES, default=RUN_ONCE)
    p.add_argument("--order", choices=("fuzzy", "dataset"), default="fuzzy",
                   help="rank by fuzzy priority or keep file order (unsorted baseline)")
    p.add_argument("--out", metavar="PATH", help="write the plan (.json or .csv)")
    _common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("evaluate", help="simulate plans against a fault model")
    p.add_argument("plans", nargs="+", metavar="PLAN")
    p.add_argument("--faults", required=True, metavar="PATH")
    p.add_argument("--dataset", metavar="PATH")
    p.add_argument("--plot-out", metavar="PATH", help="write discovery curves (CSV) and a figure (PNG)")
    _common(p, engine=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("elicit", help="fit a partition to Direct Rating survey answers")
    p.add_argument("survey", metavar="SURVEY")
    p.add_argument("--var", required=True, help="variable name, e.g. execution-time")
    p.add_argument("--variables", action="append", metavar="PATH")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--plot-out", metavar="PATH", help="write a figure of the fitted partition")
    p.set_defaults(func=cmd_elicit)

    p = sub.add_parser("validate", help="check variables, rules, dataset and optionally a plan")
    p.add_argument("--dataset", metavar="PATH")
    p.add_argument("--plan", metavar="PATH")
    p.add_argument("--grid-report", action="store_true",
                   help="also report empirical monotonicity over the 1-unit input grid")
    _common(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FuzzyTcpError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
