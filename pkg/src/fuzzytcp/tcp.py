"""Test case scoring, recently-updated promotion and prerequisite-aware scheduling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DatasetError, PrerequisiteCycleError
from .fuzzy_core import centroid
from .inference import Engine, dominant_term

EXECUTION_TIME = "ExecutionTime"
FAILURE_RATE = "FailureRate"

RUN_ONCE = "run-once"
FRESH_CHAIN = "fresh-chain"
MODES = (RUN_ONCE, FRESH_CHAIN)

RANKED = "ranked"
PREREQUISITE = "prerequisite"

# Scores are compared at this many decimals so floating-point noise in
# centroids of mirror-symmetric aggregates cannot reorder genuine ties.
SCORE_DECIMALS = 9


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


@dataclass(frozen=True)
class TestCase:
    """One test case.

    ``prerequisites`` is a tuple of OR-groups: every group must be satisfied
    and a group is satisfied by any one of its members.
    """

    __test__ = False  # keep pytest from collecting this class

    id: int
    name: str
    exec_time: float
    failure_rate: float
    prerequisites: tuple[tuple[int, ...], ...] = ()
    recently_updated: bool = False

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id <= 0:
            raise DatasetError(f"test id must be a positive integer, got {self.id!r}")
        if not isinstance(self.name, str):
            raise DatasetError(f"test {self.id}: name must be a string")
        if not _is_number(self.exec_time) or self.exec_time < 0:
            raise DatasetError(f"test {self.id}: exec_time must be a nonnegative number")
        if not _is_number(self.failure_rate) or not 0 <= self.failure_rate <= 100:
            raise DatasetError(f"test {self.id}: failure_rate must be a percentage in [0, 100]")
        if not isinstance(self.recently_updated, bool):
            raise DatasetError(f"test {self.id}: recently_updated must be a boolean")
        groups = []
        for group in self.prerequisites:
            members = tuple(group)
            if not members:
                raise DatasetError(f"test {self.id}: empty prerequisite group")
            for m in members:
                if isinstance(m, bool) or not isinstance(m, int):
                    raise DatasetError(f"test {self.id}: prerequisite ids must be integers, got {m!r}")
            groups.append(members)
        object.__setattr__(self, "prerequisites", tuple(groups))

    def prerequisite_ids(self) -> set[int]:
        return {m for g in self.prerequisites for m in g}


def _find_cycle(by_id: dict[int, TestCase], unresolved: set[int]) -> list[int]:
    # Every unresolved test has a group made only of unresolved tests; following
    # such groups must eventually revisit a node.
    node = min(unresolved)
    path: list[int] = []
    while node not in path:
        path.append(node)
        stuck = next(g for g in by_id[node].prerequisites if not any(m not in unresolved for m in g))
        node = min(stuck)
    return path[path.index(node):] + [node]


def validate_dataset(tests: Sequence[TestCase]) -> None:
    """Raise :class:`DatasetError` unless the dataset is schedulable."""
    if not tests:
        raise DatasetError("empty dataset")
    by_id: dict[int, TestCase] = {}
    for t in tests:
        if t.id in by_id:
            raise DatasetError(f"duplicate test id: {t.id}")
        by_id[t.id] = t
    for t in tests:
        for m in sorted(t.prerequisite_ids()):
            if m == t.id:
                raise DatasetError(f"test {t.id} lists itself as a prerequisite")
            if m not in by_id:
                raise DatasetError(f"test {t.id}: unknown prerequisite {m}")
    resolved: set[int] = set()
    changed = True
    while changed:
        changed = False
        for t in tests:
            if t.id not in resolved and all(any(m in resolved for m in g) for g in t.prerequisites):
                resolved.add(t.id)
                changed = True
    if len(resolved) < len(by_id):
        raise PrerequisiteCycleError(_find_cycle(by_id, set(by_id) - resolved))


def prerequisite_closure(tests: Iterable[TestCase]) -> dict[int, frozenset[int]]:
    """Every test reachable through any prerequisite member, per test."""
    by_id = {t.id: t for t in tests}
    out = {}
    for tid in by_id:
        seen: set[int] = set()
        stack = list(by_id[tid].prerequisite_ids())
        while stack:
            m = stack.pop()
            if m in seen or m not in by_id:
                continue
            seen.add(m)
            stack.extend(by_id[m].prerequisite_ids())
        seen.discard(tid)
        out[tid] = frozenset(seen)
    return out


@dataclass(frozen=True)
class PrioritizedTest:
    test_id: int
    name: str
    raw_score: float
    level: str
    promoted: bool
    final_score: float
    final_level: str


def promote(raw_score: float, level: str, updated: bool, engine: Engine) -> tuple[float, str]:
    """Raise a recently-updated test one priority level.

    The score jumps to at least the centroid of the next term, so promoted
    and unpromoted tests stay comparable on the same axis. The top level
    saturates.
    """
    out = engine.output_variable
    rank = out.rank(level)
    if not updated or rank == len(out.terms) - 1:
        return raw_score, level
    nxt = out.terms[rank + 1]
    target = centroid(nxt.mf, out.universe, engine.resolution)
    return max(raw_score, target), nxt.label


def score(test: TestCase, engine: Engine) -> PrioritizedTest:
    trace = engine.infer({EXECUTION_TIME: test.exec_time, FAILURE_RATE: test.failure_rate})
    raw = trace.crisp_output
    level = dominant_term(engine.output_variable, raw)
    final, final_level = promote(raw, level, test.recently_updated, engine)
    return PrioritizedTest(
        test_id=test.id,
        name=test.name,
        raw_score=raw,
        level=level,
        promoted=test.recently_updated,
        final_score=final,
        final_level=final_level,
    )


def _rank_key(p: PrioritizedTest):
    return (-round(p.final_score, SCORE_DECIMALS), -round(p.raw_score, SCORE_DECIMALS), p.test_id)


def prioritize(dataset: Sequence[TestCase], engine: Engine) -> list[PrioritizedTest]:
    """Score every test and sort by final score, raw score, then id."""
    if not dataset:
        raise DatasetError("empty dataset")
    ids = [t.id for t in dataset]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise DatasetError(f"duplicate test id: {dup}")
    return sorted((score(t, engine) for t in dataset), key=_rank_key)


@dataclass(frozen=True)
class PlanStep:
    test_id: int
    reason: str  # RANKED or PREREQUISITE


@dataclass(frozen=True)
class ExecutionPlan:
    steps: tuple[PlanStep, ...]
    mode: str = RUN_ONCE

    @property
    def ids(self) -> list[int]:
        return [s.test_id for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def _fresh(steps: list[PlanStep], closure: frozenset[int]) -> set[int]:
    """Tests run since the last step that lies outside ``closure``."""
    out = set()
    for s in reversed(steps):
        if s.test_id not in closure:
            break
        out.add(s.test_id)
    return out


def schedule(ranked: Sequence[PrioritizedTest], dataset: Sequence[TestCase],
             mode: str = RUN_ONCE) -> ExecutionPlan:
    """Walk ``ranked`` and emit each test after whatever prerequisites it still needs.

    Within an OR-group an already-satisfying member wins; otherwise the
    member with the highest final score (then lowest id) is inserted. If that
    choice leads into a cycle the next member is tried.

    ``run-once``: a test that has run satisfies every later dependent.
    ``fresh-chain``: a prerequisite only counts if nothing outside the
    dependent's prerequisite closure ran after it; stale chains are re-run.
    """
    if mode not in MODES:
        raise ValueError(f"unknown scheduling mode {mode!r}")
    by_id = {t.id: t for t in dataset}
    ranked_ids = [p.test_id for p in ranked]
    if sorted(ranked_ids) != sorted(by_id) or len(set(ranked_ids)) != len(ranked_ids):
        raise DatasetError("ranked list must be a permutation of the dataset ids")
    scores = {p.test_id: round(p.final_score, SCORE_DECIMALS) for p in ranked}
    closure = prerequisite_closure(dataset)
    steps: list[PlanStep] = []

    def available(tid: int) -> set[int]:
        if mode == RUN_ONCE:
            return {s.test_id for s in steps}
        return _fresh(steps, closure[tid])

    def ensure(tid: int, reason: str, stack: list[int]) -> None:
        if tid in stack:
            raise PrerequisiteCycleError(stack[stack.index(tid):] + [tid])
        for group in by_id[tid].prerequisites:
            if any(m in available(tid) for m in group):
                continue
            err = None
            for m in sorted(group, key=lambda m: (-scores[m], m)):
                mark = len(steps)
                try:
                    ensure(m, PREREQUISITE, stack + [tid])
                    break
                except PrerequisiteCycleError as e:
                    del steps[mark:]
                    err = e
            else:
                raise err
        steps.append(PlanStep(tid, reason))

    for tid in ranked_ids:
        if any(s.test_id == tid for s in steps):
            continue
        ensure(tid, RANKED, [])
    return ExecutionPlan(tuple(steps), mode)


def validate_plan(plan: ExecutionPlan, dataset: Sequence[TestCase]) -> list[str]:
    """Replay a plan and report every violated constraint (empty list = valid)."""
    by_id = {t.id: t for t in dataset}
    closure = prerequisite_closure(dataset)
    findings = []
    done: list[PlanStep] = []
    for pos, step in enumerate(plan.steps, 1):
        t = by_id.get(step.test_id)
        if t is None:
            findings.append(f"step {pos}: unknown test {step.test_id}")
            done.append(step)
            continue
        if plan.mode == RUN_ONCE:
            avail = {s.test_id for s in done}
            if step.test_id in avail:
                findings.append(f"step {pos}: test {t.id} runs more than once")
        else:
            avail = _fresh(done, closure[t.id])
        for group in t.prerequisites:
            if not any(m in avail for m in group):
                alts = " / ".join(str(m) for m in group)
                findings.append(f"step {pos}: test {t.id} runs before prerequisite {alts}")
        done.append(step)
    missing = sorted(set(by_id) - set(plan.ids))
    if missing:
        findings.append("tests never run: " + ", ".join(map(str, missing)))
    return findings


def plan_stats(plan: ExecutionPlan, dataset: Sequence[TestCase]) -> tuple[int, float]:
    """(number of executions, total seconds)."""
    times = {t.id: t.exec_time for t in dataset}
    return len(plan.steps), sum(times[s.test_id] for s in plan.steps)


def dataset_order(dataset: Sequence[TestCase], ranked: Sequence[PrioritizedTest]) -> list[PrioritizedTest]:
    """Re-sort scored tests into file order (the unsorted baseline)."""
    by_id = {p.test_id: p for p in ranked}
    return [by_id[t.id] for t in dataset]
