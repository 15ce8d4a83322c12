"""Mamdani rule evaluation: fuzzify, min-activate, clip, max-aggregate, centroid."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ClampWarning, FuzzyError, InferenceError
from .fuzzy_core import (
    LinguisticVariable,
    PiecewiseLinear,
    centroid,
    clip,
    coverage_gaps,
    midpoints,
    pointwise_union,
)

DEFAULT_RESOLUTION = 1000


@dataclass(frozen=True)
class FuzzyRule:
    """Conjunctive rule ``IF v1 is t1 AND ... THEN out is t``."""

    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]
    id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple(tuple(a) for a in self.antecedents))
        object.__setattr__(self, "consequent", tuple(self.consequent))
        if not self.antecedents:
            raise InferenceError("rule needs at least one antecedent")

    def text(self) -> str:
        cond = " AND ".join(f"{v} is {t}" for v, t in self.antecedents)
        label = f"Rule {self.id}: " if self.id is not None else ""
        return f"{label}IF {cond} THEN {self.consequent[0]} is {self.consequent[1]}"


@dataclass(frozen=True)
class RuleBase:
    rules: tuple[FuzzyRule, ...]

    def __post_init__(self):
        rules = []
        for i, r in enumerate(self.rules, 1):
            rules.append(r if r.id is not None else FuzzyRule(r.antecedents, r.consequent, i))
        object.__setattr__(self, "rules", tuple(rules))
        ids = [r.id for r in rules]
        if len(set(ids)) != len(ids):
            raise InferenceError("duplicate rule ids")
        seen: dict[frozenset, int] = {}
        for r in rules:
            key = frozenset(r.antecedents)
            if key in seen:
                raise InferenceError(f"rules {seen[key]} and {r.id} share the same antecedents")
            seen[key] = r.id

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def by_id(self, rule_id: int) -> FuzzyRule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def input_names(self) -> list[str]:
        names: list[str] = []
        for r in self.rules:
            for v, _ in r.antecedents:
                if v not in names:
                    names.append(v)
        return names

    def output_names(self) -> list[str]:
        return sorted({r.consequent[0] for r in self.rules})


def fuzzify(variable: LinguisticVariable, x: float) -> dict[str, float]:
    """Per-term membership degrees of a crisp value (clamped into the universe)."""
    try:
        xf = float(x)
    except (TypeError, ValueError):
        raise FuzzyError("invalid input value") from None
    if not math.isfinite(xf):
        raise FuzzyError("invalid input value")
    if not variable.contains(xf):
        clamped = variable.clamp(xf)
        warnings.warn(
            f"{variable.name}={xf:g} outside [{variable.universe[0]:g}, {variable.universe[1]:g}], "
            f"clamped to {clamped:g}",
            ClampWarning,
            stacklevel=2,
        )
        xf = clamped
    return {t.label: t.mf(xf) for t in variable.terms}


def activation(rule: FuzzyRule, fuzzified: Mapping[str, Mapping[str, float]]) -> float:
    """Firing strength of a rule: min over its antecedent degrees."""
    degrees = []
    for var, term in rule.antecedents:
        try:
            degrees.append(fuzzified[var][term])
        except KeyError:
            raise InferenceError(f"unknown antecedent: {var} is {term}") from None
    return min(degrees)


def dominant_term(variable: LinguisticVariable, x: float) -> str:
    """Term with the largest membership at ``x``; ties go to the higher-ranked term."""
    best, best_mu = variable.terms[0].label, -1.0
    for t in variable.terms:
        mu = t.mf(float(x))
        if mu >= best_mu:
            best, best_mu = t.label, mu
    return best


@dataclass(frozen=True)
class FiredRule:
    rule: FuzzyRule
    activation: float


@dataclass(frozen=True)
class InferenceTrace:
    inputs: dict[str, float]
    fuzzified: dict[str, dict[str, float]]
    fired: tuple[FiredRule, ...]
    aggregate: PiecewiseLinear
    samples: tuple[tuple[float, float], ...]
    crisp_output: float
    output: str
    output_term: str
    resolution: int = field(default=DEFAULT_RESOLUTION)

    def fired_ids(self) -> list[int]:
        return [f.rule.id for f in self.fired]


class Engine:
    """Immutable bundle of linguistic variables and a rule base."""

    def __init__(self, variables: Iterable[LinguisticVariable], rules: RuleBase,
                 resolution: int = DEFAULT_RESOLUTION):
        self.variables: dict[str, LinguisticVariable] = {}
        for v in variables:
            if v.name in self.variables:
                raise InferenceError(f"variable {v.name} defined twice")
            self.variables[v.name] = v
        if isinstance(resolution, bool) or not isinstance(resolution, int) or resolution < 2:
            raise FuzzyError("invalid resolution")
        self.rules = rules
        self.resolution = resolution
        outputs = rules.output_names()
        if len(outputs) != 1:
            raise InferenceError(f"rule base must have exactly one output variable, found {outputs}")
        self.output_name = outputs[0]
        for r in rules:
            for var, term in (*r.antecedents, r.consequent):
                if var not in self.variables:
                    raise InferenceError(f"rule {r.id}: unknown variable {var!r}")
                if term not in self.variables[var].labels:
                    raise InferenceError(f"rule {r.id}: unknown term {term!r} of {var}")
        for name in (*rules.input_names(), self.output_name):
            gaps = coverage_gaps(self.variables[name])
            if gaps:
                raise InferenceError(f"{name}: coverage gap at {gaps[0]}")
        out = self.output_variable
        self._consequent_sets = {t.label: out.fuzzy_set(t.label) for t in out.terms}

    @property
    def output_variable(self) -> LinguisticVariable:
        return self.variables[self.output_name]

    @property
    def input_names(self) -> list[str]:
        return self.rules.input_names()

    def with_resolution(self, resolution: int) -> "Engine":
        return Engine(self.variables.values(), self.rules, resolution)

    def infer(self, inputs: Mapping[str, float]) -> InferenceTrace:
        missing = [n for n in self.input_names if n not in inputs]
        if missing:
            raise InferenceError(f"missing input for {', '.join(missing)}")
        fuzzified: dict[str, dict[str, float]] = {}
        used: dict[str, float] = {}
        for name in self.input_names:
            var = self.variables[name]
            fuzzified[name] = fuzzify(var, inputs[name])
            used[name] = var.clamp(float(inputs[name]))

        fired = []
        for rule in self.rules:
            act = activation(rule, fuzzified)
            if act > 0:
                fired.append(FiredRule(rule, act))
        if not fired:
            raise InferenceError("empty aggregate, no rule fired")
        # Aggregate in rule-id order so the result is independent of rule-base row order.
        fired.sort(key=lambda f: f.rule.id)
        out = self.output_variable
        aggregate = PiecewiseLinear.empty(out.universe)
        for f in fired:
            aggregate = pointwise_union(aggregate, clip(self._consequent_sets[f.rule.consequent[1]], f.activation))

        xs = midpoints(out.universe, self.resolution)
        ys = aggregate(xs)
        crisp = centroid(aggregate, out.universe, self.resolution)
        return InferenceTrace(
            inputs=used,
            fuzzified=fuzzified,
            fired=tuple(fired),
            aggregate=aggregate,
            samples=tuple(zip(xs.tolist(), ys.tolist())),
            crisp_output=crisp,
            output=self.output_name,
            output_term=dominant_term(out, crisp),
            resolution=self.resolution,
        )

    def crisp(self, inputs: Mapping[str, float]) -> float:
        return self.infer(inputs).crisp_output


def infer(engine: Engine, inputs: Mapping[str, float]) -> InferenceTrace:
    return engine.infer(inputs)


def explain(trace: InferenceTrace) -> str:
    """Plain-text walkthrough of one inference."""
    lines = ["Inputs:"]
    for name, x in trace.inputs.items():
        lines.append(f"  {name} = {x:g}")
    lines.append("Fuzzified:")
    for name, degrees in trace.fuzzified.items():
        parts = ", ".join(f"{label}={mu:.4f}" for label, mu in degrees.items())
        lines.append(f"  {name}: {parts}")
    lines.append("Fired rules (clip height = activation):")
    for f in trace.fired:
        lines.append(f"  {f.rule.text()}  -> clip at {f.activation:.4f}")
    lines.append(f"Aggregate: max of {len(trace.fired)} clipped consequent(s), "
                 f"{len(trace.samples)} samples")
    lines.append(f"{trace.output} (centroid) = {trace.crisp_output:.4f} [{trace.output_term}]")
    return "\n".join(lines)


def plot_samples_csv(trace: InferenceTrace) -> str:
    rows = ["x,mu"]
    rows.extend(f"{x!r},{mu!r}" for x, mu in trace.samples)
    return "\n".join(rows) + "\n"


def trace_to_dict(trace: InferenceTrace) -> dict:
    return {
        "inputs": trace.inputs,
        "fuzzified": trace.fuzzified,
        "fired": [
            {"rule": f.rule.id, "text": f.rule.text(), "activation": f.activation}
            for f in trace.fired
        ],
        "output": trace.output,
        "crisp_output": trace.crisp_output,
        "output_term": trace.output_term,
        "resolution": trace.resolution,
    }


def monotonicity_report(engine: Engine, rising: str, falling: str, step: float = 1.0,
                        tol: float = 1e-9) -> dict:
    """Count grid neighbours where the crisp output moves against the rule-table trend.

    Output should not drop when ``rising`` increases, nor grow when ``falling``
    increases. Centroid defuzzification permits small ripples, so this is a
    diagnostic rather than a check.
    """
    rv, fv = engine.variables[rising], engine.variables[falling]
    r_grid = np.arange(rv.universe[0], rv.universe[1] + step / 2, step)
    f_grid = np.arange(fv.universe[0], fv.universe[1] + step / 2, step)
    out = np.empty((len(f_grid), len(r_grid)))
    for i, fx in enumerate(f_grid):
        for j, rx in enumerate(r_grid):
            out[i, j] = engine.crisp({rising: float(rx), falling: float(fx)})
    d_rise = np.diff(out, axis=1)
    d_fall = np.diff(out, axis=0)
    return {
        "points": int(out.size),
        "rising_violations": int((d_rise < -tol).sum()),
        "falling_violations": int((d_fall > tol).sum()),
        "worst_rising_drop": float(max(0.0, -d_rise.min())) if d_rise.size else 0.0,
        "worst_falling_gain": float(max(0.0, d_fall.max())) if d_fall.size else 0.0,
    }
