import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzytcp.errors import DatasetError, PrerequisiteCycleError
from fuzzytcp.tcp import (
    FRESH_CHAIN,
    PREREQUISITE,
    RANKED,
    RUN_ONCE,
    ExecutionPlan,
    PlanStep,
    PrioritizedTest,
    TestCase,
    dataset_order,
    plan_stats,
    prerequisite_closure,
    prioritize,
    promote,
    schedule,
    validate_dataset,
    validate_plan,
)

from oracles import SAMPLE_EXEC_TIMES


def tc(i, prereq=(), t=10, fr=20, updated=False):
    return TestCase(i, f"t{i}", t, fr, tuple(prereq), updated)


def flat(ids, score=50.0):
    """Ranked list in the given order with strictly decreasing scores."""
    return [PrioritizedTest(i, f"t{i}", score - k, "Medium", False, score - k, "Medium")
            for k, i in enumerate(ids)]


class TestTestCase:
    @pytest.mark.parametrize("kwargs", [
        dict(id=0), dict(id=True), dict(exec_time=-1), dict(failure_rate=101),
        dict(failure_rate=float("nan")), dict(recently_updated="yes"), dict(prerequisites=((),)),
    ])
    def test_field_validation(self, kwargs):
        base = dict(id=1, name="x", exec_time=1, failure_rate=1)
        with pytest.raises(DatasetError):
            TestCase(**(base | kwargs))


class TestValidateDataset:
    def test_sample_is_valid(self, dataset):
        validate_dataset(dataset)
        assert len(dataset) == 20
        assert [t.exec_time for t in dataset] == SAMPLE_EXEC_TIMES

    def test_empty(self):
        with pytest.raises(DatasetError, match="empty dataset"):
            validate_dataset([])

    def test_duplicate(self):
        with pytest.raises(DatasetError, match="duplicate test id: 2"):
            validate_dataset([tc(1), tc(2), tc(2)])

    def test_self_reference(self):
        with pytest.raises(DatasetError, match="lists itself"):
            validate_dataset([tc(1, [(1,)])])

    def test_unknown_prerequisite(self):
        with pytest.raises(DatasetError, match="test 1: unknown prerequisite 9"):
            validate_dataset([tc(1, [(9,)])])

    def test_cycle_named(self):
        with pytest.raises(PrerequisiteCycleError, match="3→4→3"):
            validate_dataset([tc(1), tc(3, [(4,)]), tc(4, [(3,)])])

    def test_or_group_escapes_cycle(self):
        # 3 needs (4 or 1); 4 needs 3. Running 1 first breaks the loop.
        validate_dataset([tc(1), tc(3, [(4, 1)]), tc(4, [(3,)])])

    def test_closure(self, dataset):
        c = prerequisite_closure(dataset)
        assert c[17] == {10, 9, 8}
        assert c[5] == {1, 2, 3}
        assert c[6] == frozenset()


class TestPromotion:
    def test_medium_jumps_to_high_centroid(self, engine):
        s, level = promote(50.0, "Medium", True, engine)
        assert level == "High"
        assert s == pytest.approx(75.0, abs=1e-9)

    def test_low_to_medium(self, engine):
        s, level = promote(35.0, "Low", True, engine)
        assert (round(s, 6), level) == (50.0, "Medium")

    def test_top_saturates(self, engine):
        assert promote(92.2, "VeryHigh", True, engine) == (92.2, "VeryHigh")

    def test_not_updated_unchanged(self, engine):
        assert promote(50.0, "Medium", False, engine) == (50.0, "Medium")

    @given(st.floats(0, 100), st.booleans())
    def test_never_lowers(self, engine, raw, updated):
        from fuzzytcp.inference import dominant_term

        level = dominant_term(engine.output_variable, raw)
        s, new = promote(raw, level, updated, engine)
        out = engine.output_variable
        assert s >= raw
        assert out.rank(new) - out.rank(level) == (1 if updated and level != "VeryHigh" else 0)


class TestPrioritize:
    def test_main_page_first(self, ranked):
        assert ranked[0].test_id == 6
        assert ranked[0].name == "Retrieve main page"
        assert ranked[0].final_score == pytest.approx(75.0)

    def test_promoted_ties_follow_by_id(self, ranked):
        assert [p.test_id for p in ranked[:3]] == [6, 2, 9]
        assert ranked[1].promoted and ranked[2].promoted
        assert ranked[1].raw_score == pytest.approx(50.0)

    def test_full_order(self, ranked):
        assert [p.test_id for p in ranked] == [
            6, 2, 9, 1, 7, 8, 15, 18, 17, 11, 12, 3, 4, 5, 10, 13, 14, 16, 20, 19]

    def test_sorted_by_final_score(self, ranked):
        finals = [round(p.final_score, 9) for p in ranked]
        assert finals == sorted(finals, reverse=True)

    def test_input_order_irrelevant(self, dataset, engine, ranked):
        shuffled = list(dataset)
        random.Random(3).shuffle(shuffled)
        assert prioritize(shuffled, engine) == ranked

    def test_duplicate(self, engine):
        with pytest.raises(DatasetError, match="duplicate"):
            prioritize([tc(1), tc(1)], engine)


class TestSchedule:
    def test_run_once_sample(self, ranked, dataset):
        plan = schedule(ranked, dataset, RUN_ONCE)
        assert plan.ids == [6, 3, 2, 8, 9, 1, 7, 15, 10, 17, 18, 11, 12, 4, 5, 13, 14, 16, 20, 19]
        assert plan_stats(plan, dataset) == (20, 495)
        assert validate_plan(plan, dataset) == []

    def test_reasons(self, ranked, dataset):
        plan = schedule(ranked, dataset, RUN_ONCE)
        reasons = {s.test_id: s.reason for s in plan.steps}
        assert reasons[3] == PREREQUISITE and reasons[6] == RANKED
        assert reasons[10] == PREREQUISITE

    def test_chain_pulled_in_order(self):
        data = [tc(8), tc(9, [(8,)]), tc(10, [(9,)]), tc(17, [(10,)])]
        plan = schedule(flat([17, 8, 9, 10]), data)
        assert plan.ids == [8, 9, 10, 17]
        assert [s.reason for s in plan.steps] == [PREREQUISITE] * 3 + [RANKED]

    def test_or_group_prefers_already_run(self):
        data = [tc(1), tc(2), tc(5, [(1, 2)])]
        assert schedule(flat([2, 5, 1]), data).ids == [2, 5, 1]

    def test_or_group_prefers_higher_score(self):
        data = [tc(1), tc(2), tc(5, [(1, 2)])]
        # 2 ranks above 1, so 2 is the member pulled in for 5.
        assert schedule(flat([5, 2, 1]), data).ids == [2, 5, 1]

    def test_or_group_avoids_cycle(self):
        data = [tc(1), tc(3, [(4, 1)]), tc(4, [(3,)])]
        plan = schedule(flat([3, 4, 1]), data)
        assert plan.ids == [1, 3, 4]
        assert validate_plan(plan, data) == []

    def test_fresh_chain_reruns(self, ranked, dataset):
        once = schedule(ranked, dataset, RUN_ONCE)
        fresh = schedule(ranked, dataset, FRESH_CHAIN)
        assert validate_plan(fresh, dataset) == []
        assert len(fresh) == 41 and plan_stats(fresh, dataset)[1] == 1000
        assert len(fresh) > len(once)
        ids = fresh.ids
        for pos, tid in enumerate(ids):
            if tid == 17:
                assert ids[pos - 3:pos] == [8, 9, 10]

    def test_fresh_chain_dataset_order(self, ranked, dataset):
        plan = schedule(dataset_order(dataset, ranked), dataset, FRESH_CHAIN)
        assert validate_plan(plan, dataset) == []
        assert plan_stats(plan, dataset) == (39, 975)

    def test_bad_mode(self, ranked, dataset):
        with pytest.raises(ValueError):
            schedule(ranked, dataset, "sometimes")

    def test_not_a_permutation(self, ranked, dataset):
        with pytest.raises(DatasetError):
            schedule(ranked[:-1], dataset)


class TestValidatePlan:
    def test_out_of_order(self):
        data = [tc(1), tc(2, [(1,)])]
        plan = ExecutionPlan((PlanStep(2, RANKED), PlanStep(1, RANKED)))
        assert validate_plan(plan, data) == ["step 1: test 2 runs before prerequisite 1"]

    def test_missing_and_duplicate(self):
        data = [tc(1), tc(2)]
        plan = ExecutionPlan((PlanStep(1, RANKED), PlanStep(1, RANKED)))
        assert validate_plan(plan, data) == [
            "step 2: test 1 runs more than once", "tests never run: 2"]

    def test_stale_in_fresh_mode(self):
        data = [tc(1), tc(2), tc(3, [(1,)])]
        steps = tuple(PlanStep(i, RANKED) for i in (1, 2, 3))
        assert validate_plan(ExecutionPlan(steps, RUN_ONCE), data) == []
        assert validate_plan(ExecutionPlan(steps, FRESH_CHAIN), data) == [
            "step 3: test 3 runs before prerequisite 1"]


@st.composite
def dags(draw):
    n = draw(st.integers(1, 12))
    tests = []
    for i in range(1, n + 1):
        groups = []
        if i > 1:
            for _ in range(draw(st.integers(0, 2))):
                groups.append(tuple(draw(st.lists(st.integers(1, i - 1), min_size=1, max_size=2,
                                                  unique=True))))
        tests.append(tc(i, groups, t=draw(st.integers(1, 30))))
    perm = draw(st.permutations([t.id for t in tests]))
    return tests, perm


@settings(max_examples=150, deadline=None)
@given(dags(), st.sampled_from([RUN_ONCE, FRESH_CHAIN]))
def test_schedule_always_valid(case, mode):
    tests, order = case
    plan = schedule(flat(order), tests, mode)
    assert validate_plan(plan, tests) == []
    if mode == RUN_ONCE:
        assert sorted(plan.ids) == sorted(t.id for t in tests)
        assert plan_stats(plan, tests)[1] == sum(t.exec_time for t in tests)
    else:
        assert len(plan) >= len(tests)


@settings(max_examples=100, deadline=None)
@given(dags())
def test_ranked_order_respected_without_prerequisites(case):
    tests, order = case
    free = [TestCase(t.id, t.name, t.exec_time, t.failure_rate) for t in tests]
    assert schedule(flat(order), free).ids == list(order)
