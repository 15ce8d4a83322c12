"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Lines are printed as they complete and repeated in the terminal summary.
"""

import contextlib
import itertools
import time

import numpy as np
import pytest

from fuzzytcp import io as fio
from fuzzytcp.cli import main
from fuzzytcp.elicitation import (
    RatingSample,
    Survey,
    build_partition,
    survey_from_partition,
    validate_partition,
)
from fuzzytcp.errors import SurveyError
from fuzzytcp.evaluation import FaultModel, simulate
from fuzzytcp.fuzzy_core import (
    MembershipFunction,
    alpha_cut,
    centroid,
    clip,
    pointwise_intersection,
    pointwise_union,
)
from fuzzytcp.tcp import FRESH_CHAIN, RUN_ONCE, prioritize, schedule

from oracles import RULES, SAMPLE_EXEC_TIMES, mu, trapezoid_centroid

RESULTS: list[str] = []

# Default-partition value of the worked example, frozen from the trapezoid oracle.
GOLDEN_20_65 = 81.2222


@contextlib.contextmanager
def criterion(number, title, budget=None):
    t0 = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - t0
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
    except BaseException as e:
        elapsed = time.perf_counter() - t0
        line = f"[{number}] FAIL  {title} ({elapsed:.2f}s): {e}"
        RESULTS.append(line)
        print("\n" + line)
        raise
    line = f"[{number}] PASS  {title} ({elapsed:.2f}s)"
    RESULTS.append(line)
    print("\n" + line)


def random_mf(rng, lo=0.0, hi=100.0):
    pts = np.sort(rng.uniform(lo, hi, 4))
    if rng.random() < 0.5:
        return MembershipFunction.triangular(pts[0], pts[1], pts[3])
    return MembershipFunction.trapezoidal(*pts)


def test_1_centroid_matches_oracle():
    rng = np.random.default_rng(1)
    cases = []
    while len(cases) < 100:
        k = int(rng.integers(1, 5))
        parts = [(random_mf(rng), float(rng.uniform(0.05, 1.0))) for _ in range(k)]
        if all(mf.abcd()[3] - mf.abcd()[0] < 1.0 for mf, _ in parts):
            continue
        cases.append(parts)

    worst = 0.0
    with criterion(1, "centroid at 1000 vs trapezoid oracle at 10000 within 0.1", budget=5.0):
        for parts in cases:
            agg = clip(*parts[0])
            for mf, h in parts[1:]:
                agg = pointwise_union(agg, clip(mf, h))
            got = centroid(agg, (0, 100), 1000)

            def f(xs, parts=parts):
                return np.max([np.minimum(mu(mf.abcd(), xs), h) for mf, h in parts], axis=0)

            want = trapezoid_centroid(f, 0, 100, 10000)
            worst = max(worst, abs(got - want))
        assert worst < 0.1, f"max deviation {worst:.4f}"


def test_2_alpha_cut_identities():
    rng = np.random.default_rng(2)
    pairs = [(random_mf(rng), random_mf(rng)) for _ in range(50)]
    alphas = [k / 10 for k in range(1, 11)]
    with criterion(2, "alpha-cuts of union/intersection equal union/intersection of cuts",
                   budget=1.0):
        for f, g in pairs:
            u, n = pointwise_union(f, g), pointwise_intersection(f, g)
            for a in alphas:
                cf, cg = alpha_cut(f, a), alpha_cut(g, a)
                assert alpha_cut(u, a).approx_equal(cf.union(cg)), (f, g, a)
                assert alpha_cut(n, a).approx_equal(cf.intersection(cg)), (f, g, a)


def test_3_worked_example(capsys):
    with criterion(3, "infer 20 65 fires exactly rules 16 and 20, output in [65, 90]"):
        engine = fio.build_engine()
        trace = engine.infer({"ExecutionTime": 20, "FailureRate": 65})
        assert trace.fired_ids() == [16, 20]
        assert 65 <= trace.crisp_output <= 90

        # Golden value, re-derived by the oracle from the fired rules alone.
        def f(xs):
            return np.max([np.minimum(mu((60, 75, 75, 90), xs), 1 / 3),
                           np.minimum(mu((80, 90, 100, 100), xs), 1 / 3)], axis=0)

        assert trapezoid_centroid(f, 0, 100, 10000) == pytest.approx(GOLDEN_20_65, abs=1e-3)
        assert trace.crisp_output == pytest.approx(GOLDEN_20_65, abs=1e-3)

        assert main(["infer", "20", "65"]) == 0
        assert capsys.readouterr().out.strip() == f"Priority: {GOLDEN_20_65:.4f} (High)"


def test_4_rule_base_fidelity():
    with criterion(4, "shipped rule base is the 20-row table, complete and monotone", budget=1.0):
        rules = fio.default_rules()
        got = {}
        for r in rules:
            a = dict(r.antecedents)
            got[r.id] = (a["ExecutionTime"], a["FailureRate"], r.consequent[1])
        assert len(rules) == 20
        assert got == RULES

        et = ["Short", "Medium", "High", "VeryHigh"]
        fr = ["VeryLow", "Low", "Medium", "High", "VeryHigh"]
        pr = ["VeryLow", "Low", "Medium", "High", "VeryHigh"]
        table = {(et.index(e), fr.index(f)): pr.index(p) for e, f, p in got.values()}
        assert set(table) == set(itertools.product(range(4), range(5)))
        for i in range(4):
            assert all(table[i, j] <= table[i, j + 1] for j in range(4))
        for j in range(5):
            assert all(table[i, j] >= table[i + 1, j] for i in range(3))


def test_5_completeness_grid():
    engine = fio.build_engine()
    with criterion(5, "1-unit grid over [0,120]x[0,100] always yields a value in [0,100]",
                   budget=30.0):
        count = 0
        for et in range(121):
            for fr in range(101):
                y = engine.crisp({"ExecutionTime": et, "FailureRate": fr})
                assert 0 <= y <= 100, (et, fr, y)
                count += 1
        assert count == 121 * 101


def test_6_sample_dataset_golden_run():
    with criterion(6, "main page ranked first; run-once plan is 20 steps / 495 s, prerequisites first"):
        dataset = fio.default_dataset()
        ranked = prioritize(dataset, fio.build_engine())
        assert ranked[0].name == "Retrieve main page"
        assert round(ranked[0].final_score, 6) == 75.0

        plan = schedule(ranked, dataset, RUN_ONCE)
        assert len(plan) == 20
        total = sum(t.exec_time for t in dataset if t.id in set(plan.ids))
        assert total == sum(SAMPLE_EXEC_TIMES) == 495

        pos = {tid: i for i, tid in enumerate(plan.ids)}
        for t in dataset:
            for group in t.prerequisites:
                assert any(pos[m] < pos[t.id] for m in group), (t.id, group)
        assert pos[8] < pos[9] < pos[10] < pos[17]


def test_7_fault_detection_and_modes():
    with criterion(7, "complete run-once plans find every fault; fresh-chain runs more than run-once"):
        dataset = fio.default_dataset()
        ranked = prioritize(dataset, fio.build_engine())
        rng = np.random.default_rng(7)
        for _ in range(50):
            order = [ranked[i] for i in rng.permutation(len(ranked))]
            plan = schedule(order, dataset, RUN_ONCE)
            size = int(rng.integers(0, 21))
            faults = FaultModel(set(int(i) for i in rng.choice(np.arange(1, 21), size, replace=False)))
            assert simulate(plan, dataset, faults).failures_found == size
        five = FaultModel({6, 9, 12, 17, 19})
        assert simulate(schedule(ranked, dataset, RUN_ONCE), dataset, five).failures_found == 5

        once = schedule(ranked, dataset, RUN_ONCE)
        fresh = schedule(ranked, dataset, FRESH_CHAIN)
        assert len(fresh) > len(once)


def test_8_elicitation_roundtrip():
    with criterion(8, "synthetic survey rebuilds ExecutionTime within 1 s; outputs have no findings"):
        var = fio.build_engine().variables["ExecutionTime"]
        rebuilt = build_partition(survey_from_partition(var))
        for t, r in zip(var.terms, rebuilt.terms):
            assert t.label == r.label
            assert max(abs(p - q) for p, q in zip(t.mf.abcd(), r.mf.abcd())) <= 1.0, (t, r)
        assert validate_partition(rebuilt) == []

        rng = np.random.default_rng(8)
        built = 0
        for _ in range(200):
            k = int(rng.integers(2, 6))
            centres = np.sort(rng.choice(np.arange(5, 116), k, replace=False))
            samples = []
            for i, c in enumerate(centres):
                vals = np.clip(c + rng.normal(0, rng.uniform(0.5, 12), int(rng.integers(1, 8))), 0, 120)
                samples += [RatingSample(f"E{j}", float(v), f"T{i}") for j, v in enumerate(vals)]
                samples.append(RatingSample("E0", float(c), f"T{i}"))
            s = Survey("X", (0, 120), tuple(f"T{i}" for i in range(k)), tuple(samples))
            try:
                out = build_partition(s)
            except SurveyError as e:
                assert "inconsistent survey" in str(e)
                continue
            built += 1
            assert validate_partition(out) == [], validate_partition(out)
        assert built >= 100
