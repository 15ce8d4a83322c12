"""Loading and saving every file kind the toolkit reads or writes.

Structured files are JSON. Datasets may also be CSV with the columns
``id,name,exec_time,failure_rate,prerequisites,recently_updated`` where a
prerequisite cell like ``1 / 2`` is one OR-group and ``10, 11`` is two
AND-ed groups.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

from .elicitation import RatingSample, Survey
from .errors import DatasetError, FuzzyError, InferenceError, SurveyError
from .evaluation import FaultModel
from .fuzzy_core import FuzzyTerm, LinguisticVariable, MembershipFunction
from .inference import DEFAULT_RESOLUTION, Engine, FuzzyRule, RuleBase
from .tcp import (
    MODES,
    PREREQUISITE,
    RANKED,
    RUN_ONCE,
    ExecutionPlan,
    PlanStep,
    TestCase,
    validate_dataset,
)

DATASET_VERSION = 1
CSV_COLUMNS = ["id", "name", "exec_time", "failure_rate", "prerequisites", "recently_updated"]
DEFAULT_VARIABLE_FILES = ("execution_time.json", "failure_rate.json", "priority.json")


def data_path(name: str) -> Path:
    """Path of a bundled data file."""
    return Path(str(resources.files("fuzzytcp") / "data" / name))


def _read_json(path, error=DatasetError) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise error(f"{path}:{e.lineno}:{e.colno}: parse error: {e.msg}") from None


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _num(x: float):
    """Render integral floats as ints so hand-written files stay readable."""
    if isinstance(x, float) and x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def _check_keys(obj, where: str, required: Iterable[str], optional: Iterable[str] = (),
                error=DatasetError) -> None:
    if not isinstance(obj, dict):
        raise error(f"{where}: expected an object")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise error(f"{where}: unknown field {key!r}")
    for key in required:
        if key not in obj:
            raise error(f"{where}: missing field {key!r}")


# -- linguistic variables ----------------------------------------------------

def variable_to_dict(var: LinguisticVariable) -> dict:
    return {
        "name": var.name,
        "unit": var.unit,
        "universe": [_num(var.universe[0]), _num(var.universe[1])],
        "terms": [
            {"label": t.label, "shape": t.mf.shape, "params": [_num(p) for p in t.mf.params]}
            for t in var.terms
        ],
    }


def variable_from_dict(d, where: str = "variable") -> LinguisticVariable:
    _check_keys(d, where, ["name", "universe", "terms"], ["unit"], FuzzyError)
    terms = []
    for i, t in enumerate(d["terms"]):
        _check_keys(t, f"{where}.terms[{i}]", ["label", "shape", "params"], (), FuzzyError)
        terms.append(FuzzyTerm(t["label"], MembershipFunction(t["shape"], tuple(t["params"]))))
    if not isinstance(d["universe"], list) or len(d["universe"]) != 2:
        raise FuzzyError(f"{where}.universe: expected [lo, hi]")
    return LinguisticVariable(d["name"], tuple(d["universe"]), tuple(terms), d.get("unit", ""))


def load_variables(path) -> list[LinguisticVariable]:
    """Load one variable document, or a JSON list of them."""
    doc = _read_json(path, FuzzyError)
    docs = doc if isinstance(doc, list) else [doc]
    return [variable_from_dict(d, f"{path}[{i}]" if isinstance(doc, list) else str(path))
            for i, d in enumerate(docs)]


def load_variable(path) -> LinguisticVariable:
    found = load_variables(path)
    if len(found) != 1:
        raise FuzzyError(f"{path}: expected exactly one variable, found {len(found)}")
    return found[0]


def save_variable(var: LinguisticVariable, path) -> None:
    _write_json(path, variable_to_dict(var))


def default_variables() -> list[LinguisticVariable]:
    return [load_variable(data_path(f)) for f in DEFAULT_VARIABLE_FILES]


# -- rule base ---------------------------------------------------------------

def rules_to_dict(rules: RuleBase) -> dict:
    return {
        "rules": [
            {
                "id": r.id,
                "if": [{"var": v, "term": t} for v, t in r.antecedents],
                "then": {"var": r.consequent[0], "term": r.consequent[1]},
            }
            for r in rules
        ]
    }


def rules_from_dict(d, where: str = "rules") -> RuleBase:
    _check_keys(d, where, ["rules"], (), InferenceError)
    rules = []
    for i, r in enumerate(d["rules"]):
        at = f"{where}.rules[{i}]"
        _check_keys(r, at, ["if", "then"], ["id"], InferenceError)
        ants = []
        for j, a in enumerate(r["if"]):
            _check_keys(a, f"{at}.if[{j}]", ["var", "term"], (), InferenceError)
            ants.append((a["var"], a["term"]))
        _check_keys(r["then"], f"{at}.then", ["var", "term"], (), InferenceError)
        rules.append(FuzzyRule(tuple(ants), (r["then"]["var"], r["then"]["term"]), r.get("id", i + 1)))
    return RuleBase(tuple(rules))


def load_rules(path) -> RuleBase:
    return rules_from_dict(_read_json(path, InferenceError), str(path))


def save_rules(rules: RuleBase, path) -> None:
    _write_json(path, rules_to_dict(rules))


def default_rules() -> RuleBase:
    return load_rules(data_path("default_rules.json"))


def build_engine(variable_paths: Sequence = (), rules_path=None,
                 resolution: int = DEFAULT_RESOLUTION) -> Engine:
    """Default partitions and rule base, with any given files overriding by variable name."""
    variables = {v.name: v for v in default_variables()}
    for p in variable_paths:
        for v in load_variables(p):
            variables[v.name] = v
    rules = load_rules(rules_path) if rules_path else default_rules()
    return Engine(variables.values(), rules, resolution)


# -- datasets ----------------------------------------------------------------

def testcase_to_dict(t: TestCase) -> dict:
    return {
        "id": t.id,
        "name": t.name,
        "exec_time": t.exec_time,
        "failure_rate": t.failure_rate,
        "prerequisites": [list(g) for g in t.prerequisites],
        "recently_updated": t.recently_updated,
    }


def _testcase_from_dict(d, where: str) -> TestCase:
    _check_keys(d, where, ["id", "name", "exec_time", "failure_rate"],
                ["prerequisites", "recently_updated"])
    prereqs = d.get("prerequisites", [])
    if not isinstance(prereqs, list) or not all(isinstance(g, list) for g in prereqs):
        raise DatasetError(f"{where}.prerequisites: expected a list of id lists")
    try:
        return TestCase(d["id"], d["name"], d["exec_time"], d["failure_rate"],
                        tuple(tuple(g) for g in prereqs), d.get("recently_updated", False))
    except DatasetError as e:
        raise DatasetError(f"{where}: {e}") from None


def load_dataset(path) -> list[TestCase]:
    """Load and fully validate a JSON (or, by extension, CSV) dataset."""
    if Path(path).suffix.lower() == ".csv":
        return load_csv_dataset(path)
    doc = _read_json(path)
    _check_keys(doc, str(path), ["version", "tests"])
    if doc["version"] != DATASET_VERSION:
        raise DatasetError(f"{path}: unsupported dataset version {doc['version']!r}")
    if not isinstance(doc["tests"], list):
        raise DatasetError(f"{path}.tests: expected a list")
    tests = [_testcase_from_dict(d, f"{path}: tests[{i}]") for i, d in enumerate(doc["tests"])]
    validate_dataset(tests)
    return tests


def save_dataset(tests: Sequence[TestCase], path) -> None:
    if Path(path).suffix.lower() == ".csv":
        save_csv_dataset(tests, path)
        return
    _write_json(path, {"version": DATASET_VERSION, "tests": [testcase_to_dict(t) for t in tests]})


def parse_prerequisites(cell: str) -> tuple[tuple[int, ...], ...]:
    """``"1 / 2, 3"`` -> ``((1, 2), (3,))``."""
    cell = cell.strip()
    if not cell:
        return ()
    groups = []
    for part in cell.split(","):
        members = [m.strip() for m in part.split("/")]
        if not all(m.isdigit() for m in members):
            raise ValueError(f"bad prerequisite cell {cell!r}")
        groups.append(tuple(int(m) for m in members))
    return tuple(groups)


def format_prerequisites(groups: Sequence[Sequence[int]]) -> str:
    return ", ".join(" / ".join(str(m) for m in g) for g in groups)


def _parse_number(text: str) -> float:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {text!r}")
        return value


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no", ""):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def load_csv_dataset(path) -> list[TestCase]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, skipinitialspace=True)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError("empty dataset") from None
        if header != CSV_COLUMNS:
            raise DatasetError(f"{path}: row 1: expected header {','.join(CSV_COLUMNS)}")
        tests = []
        for row in reader:
            rowno = reader.line_num
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(CSV_COLUMNS):
                raise DatasetError(f"{path}: row {rowno}: expected {len(CSV_COLUMNS)} cells, got {len(row)}")
            try:
                tid, name, et, fr, pre, upd = row
                tests.append(TestCase(
                    int(tid.strip()), name.strip(), _parse_number(et), _parse_number(fr),
                    parse_prerequisites(pre), _parse_bool(upd),
                ))
            except (ValueError, DatasetError) as e:
                raise DatasetError(f"{path}: row {rowno}: {e}") from None
    validate_dataset(tests)
    return tests


def save_csv_dataset(tests: Sequence[TestCase], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in tests:
            w.writerow([t.id, t.name, t.exec_time, t.failure_rate,
                        format_prerequisites(t.prerequisites), str(t.recently_updated).lower()])


def default_dataset() -> list[TestCase]:
    return load_dataset(data_path("sample_dataset.json"))


# -- surveys -----------------------------------------------------------------

def survey_to_dict(s: Survey) -> dict:
    return {
        "variable": s.variable,
        "unit": s.unit,
        "universe": [_num(s.universe[0]), _num(s.universe[1])],
        "terms": list(s.terms),
        "samples": [{"expert": r.expert, "value": r.value, "term": r.term} for r in s.samples],
    }


def load_survey(path, template: LinguisticVariable | None = None) -> Survey:
    """JSON surveys are self-describing; CSV surveys (expert,value,term) take
    the variable name, universe and term order from ``template``."""
    if Path(path).suffix.lower() == ".csv":
        if template is None:
            raise SurveyError(f"{path}: CSV survey needs a template variable")
        samples = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, skipinitialspace=True)
            header = [h.strip() for h in next(reader, [])]
            if header != ["expert", "value", "term"]:
                raise SurveyError(f"{path}: row 1: expected header expert,value,term")
            for row in reader:
                if not any(c.strip() for c in row):
                    continue
                try:
                    expert, value, term = (c.strip() for c in row)
                    samples.append(RatingSample(expert, float(value), term))
                except ValueError as e:
                    raise SurveyError(f"{path}: row {reader.line_num}: {e}") from None
        return Survey(template.name, template.universe, tuple(template.labels), tuple(samples),
                      template.unit)
    d = _read_json(path, SurveyError)
    _check_keys(d, str(path), ["variable", "universe", "terms", "samples"], ["unit"], SurveyError)
    samples = []
    for i, r in enumerate(d["samples"]):
        _check_keys(r, f"{path}.samples[{i}]", ["expert", "value", "term"], (), SurveyError)
        samples.append(RatingSample(str(r["expert"]), r["value"], r["term"]))
    return Survey(d["variable"], tuple(d["universe"]), tuple(d["terms"]), tuple(samples),
                  d.get("unit", ""))


def save_survey(s: Survey, path) -> None:
    if Path(path).suffix.lower() == ".csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["expert", "value", "term"])
            for r in s.samples:
                w.writerow([r.expert, repr(r.value), r.term])
        return
    _write_json(path, survey_to_dict(s))


# -- fault models --------------------------------------------------------------

def load_faults(path) -> FaultModel:
    """Test ids separated by whitespace or commas; ``#`` starts a comment."""
    ids = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        for tok in line.split("#", 1)[0].replace(",", " ").split():
            if not tok.isdigit():
                raise DatasetError(f"{path}:{lineno}: bad test id {tok!r}")
            ids.append(int(tok))
    return FaultModel(frozenset(ids))


def save_faults(faults: FaultModel, path) -> None:
    Path(path).write_text("".join(f"{i}\n" for i in sorted(faults.faulty_ids)), encoding="utf-8")


# -- plans ---------------------------------------------------------------------

PLAN_COLUMNS = ["position", "id", "name", "reason", "exec_time", "cumulative_time"]


def plan_rows(plan: ExecutionPlan, dataset: Sequence[TestCase]) -> list[dict]:
    by_id = {t.id: t for t in dataset}
    rows, total = [], 0
    for pos, step in enumerate(plan.steps, 1):
        t = by_id[step.test_id]
        total += t.exec_time
        rows.append({"position": pos, "id": t.id, "name": t.name, "reason": step.reason,
                     "exec_time": t.exec_time, "cumulative_time": total})
    return rows


def plan_to_dict(plan: ExecutionPlan, dataset: Sequence[TestCase]) -> dict:
    return {"mode": plan.mode, "steps": plan_rows(plan, dataset)}


def plan_to_csv(plan: ExecutionPlan, dataset: Sequence[TestCase]) -> str:
    buf = _stdio.StringIO()
    w = csv.DictWriter(buf, PLAN_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(plan_rows(plan, dataset))
    return buf.getvalue()


def save_plan(plan: ExecutionPlan, dataset: Sequence[TestCase], path) -> None:
    """JSON by default, CSV for a ``.csv`` path. CSV does not record the mode."""
    if Path(path).suffix.lower() == ".csv":
        Path(path).write_text(plan_to_csv(plan, dataset), encoding="utf-8")
    else:
        _write_json(path, plan_to_dict(plan, dataset))


def _step(row, where: str) -> PlanStep:
    reason = row.get("reason", RANKED)
    if reason not in (RANKED, PREREQUISITE):
        raise DatasetError(f"{where}: unknown reason {reason!r}")
    try:
        tid = int(row["id"])
    except (KeyError, ValueError, TypeError):
        raise DatasetError(f"{where}: missing or bad test id") from None
    return PlanStep(tid, reason)


def load_plan(path, mode: str | None = None) -> ExecutionPlan:
    if Path(path).suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            unknown = set(reader.fieldnames or ()) - set(PLAN_COLUMNS)
            if unknown:
                raise DatasetError(f"{path}: row 1: unknown columns {sorted(unknown)}")
            steps = [_step(r, f"{path}: row {i + 2}") for i, r in enumerate(reader)]
        return ExecutionPlan(tuple(steps), mode or RUN_ONCE)
    d = _read_json(path)
    _check_keys(d, str(path), ["steps"], ["mode"])
    plan_mode = mode or d.get("mode", RUN_ONCE)
    if plan_mode not in MODES:
        raise DatasetError(f"{path}: unknown mode {plan_mode!r}")
    steps = []
    for i, r in enumerate(d["steps"]):
        _check_keys(r, f"{path}.steps[{i}]", ["id"], PLAN_COLUMNS)
        steps.append(_step(r, f"{path}.steps[{i}]"))
    return ExecutionPlan(tuple(steps), plan_mode)

