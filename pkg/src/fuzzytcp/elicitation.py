"""Fit term partitions to Direct Rating survey answers.

Each answer says "value v belongs to term T". Per term, the interquartile
range of its values becomes the core and the full range of its values the
support. Where two adjacent terms' ranges do not overlap, their supports are
stretched to each other's core edge so that the partition has no holes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SurveyError
from .fuzzy_core import (
    FuzzyTerm,
    LinguisticVariable,
    MembershipFunction,
    coverage_gaps,
)


@dataclass(frozen=True)
class RatingSample:
    expert: str
    value: float
    term: str

    def __post_init__(self):
        try:
            v = float(self.value)
        except (TypeError, ValueError):
            raise SurveyError(f"non-numeric survey value {self.value!r}") from None
        if not math.isfinite(v):
            raise SurveyError("survey values must be finite")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Survey:
    variable: str
    universe: tuple[float, float]
    terms: tuple[str, ...]
    samples: tuple[RatingSample, ...]
    unit: str = ""

    def __post_init__(self):
        lo, hi = (float(u) for u in self.universe)
        if not lo < hi:
            raise SurveyError(f"{self.variable}: universe needs lo < hi")
        object.__setattr__(self, "universe", (lo, hi))
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "samples", tuple(self.samples))
        if len(set(self.terms)) != len(self.terms) or not self.terms:
            raise SurveyError(f"{self.variable}: term labels must be unique and non-empty")
        for s in self.samples:
            if s.term not in self.terms:
                raise SurveyError(f"{self.variable}: unknown term {s.term!r} (expert {s.expert})")
            if not lo <= s.value <= hi:
                raise SurveyError(f"{self.variable}: value {s.value:g} outside [{lo:g}, {hi:g}]")

    def values(self, term: str) -> list[float]:
        return sorted(s.value for s in self.samples if s.term == term)


def _make_mf(a: float, b: float, c: float, d: float) -> MembershipFunction:
    if b == c:
        return MembershipFunction.triangular(a, b, d)
    return MembershipFunction.trapezoidal(a, b, c, d)


def build_partition(survey: Survey, widen_step: float | None = None) -> LinguisticVariable:
    lo, hi = survey.universe
    stats = []
    for label in survey.terms:
        vals = survey.values(label)
        if not vals:
            raise SurveyError(f"{survey.variable}: term {label!r} has no samples")
        arr = np.asarray(vals)
        q1, med, q3 = np.percentile(arr, [25, 50, 75])
        stats.append({"min": float(arr[0]), "max": float(arr[-1]), "q1": float(q1),
                      "q3": float(q3), "median": float(med)})

    for prev, (label, cur) in zip(stats, list(zip(survey.terms, stats))[1:]):
        if not prev["median"] < cur["median"]:
            raise SurveyError(f"inconsistent survey: median of {label!r} is not above the previous term's")

    n = len(stats)
    a = [s["min"] for s in stats]
    b = [s["q1"] for s in stats]
    c = [s["q3"] for s in stats]
    d = [s["max"] for s in stats]
    a[0] = b[0] = lo
    c[-1] = d[-1] = hi
    if n == 1:
        a[0], b[0], c[0], d[0] = lo, lo, hi, hi
    peaks = [(b[k] + c[k]) / 2 for k in range(n)]
    if any(p > q for p, q in zip(peaks, peaks[1:])):
        raise SurveyError("inconsistent survey: term cores are out of rank order")

    for k in range(1, n):
        if stats[k - 1]["max"] <= stats[k]["min"]:
            d[k - 1] = max(d[k - 1], b[k])
            a[k] = min(a[k], c[k - 1])

    def assemble() -> LinguisticVariable:
        terms = tuple(FuzzyTerm(label, _make_mf(a[k], b[k], c[k], d[k]))
                      for k, label in enumerate(survey.terms))
        return LinguisticVariable(survey.variable, (lo, hi), terms, survey.unit)

    var = assemble()
    step = widen_step if widen_step is not None else (hi - lo) / 200
    for _ in range(int(math.ceil((hi - lo) / step)) + 1):
        if not any(f.startswith(("coverage gap", "no overlap")) for f in validate_partition(var)):
            break
        for k in range(n):
            a[k] = max(lo, a[k] - step)
            d[k] = min(hi, d[k] + step)
        var = assemble()
    return var


def validate_partition(variable: LinguisticVariable) -> list[str]:
    """Coverage, term ordering and adjacent-overlap findings; empty when valid."""
    findings = [f"coverage gap [{g0:g}, {g1:g}]" for g0, g1 in coverage_gaps(variable)]
    terms = variable.terms
    for t1, t2 in zip(terms, terms[1:]):
        if t1.mf.peak > t2.mf.peak:
            findings.append(
                f"order violation: {t2.label} (peak {t2.mf.peak:g}) precedes "
                f"{t1.label} (peak {t1.mf.peak:g})"
            )
        a1, d1 = t1.mf.support
        a2, d2 = t2.mf.support
        if not min(d1, d2) > max(a1, a2):
            findings.append(f"no overlap between {t1.label} and {t2.label}")
    return findings


def survey_from_partition(variable: LinguisticVariable, experts: int = 3) -> Survey:
    """Synthetic survey whose answers reproduce ``variable`` under :func:`build_partition`.

    Five answers per term at ``a, b, (b+c)/2, c, d``: with linear-interpolated
    percentiles the quartiles land on the core edges and the extremes on the
    support edges.
    """
    samples = []
    i = 0
    for t in variable.terms:
        a, b, c, d = t.mf.abcd()
        for v in (a, b, (b + c) / 2, c, d):
            samples.append(RatingSample(f"E{i % experts + 1}", v, t.label))
            i += 1
    return Survey(variable.name, variable.universe, tuple(variable.labels), tuple(samples),
                  variable.unit)
