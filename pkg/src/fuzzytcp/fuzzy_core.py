"""Membership functions, linguistic variables, alpha-cuts and pointwise set operations.

Two representations live here:

* :class:`MembershipFunction` -- a triangular or trapezoidal shape given by
  its breakpoints. This is what variable files store.
* :class:`PiecewiseLinear` -- a general piecewise-linear membership function
  (possibly with jumps at knots). Unions, intersections and clipping are
  closed over this type, which is what lets alpha-cuts of combined sets be
  computed exactly rather than by sampling.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import FuzzyError, InferenceError

Interval = tuple[float, float]

TRIANGULAR = "triangular"
TRAPEZOIDAL = "trapezoidal"
SHAPES = {TRIANGULAR: 3, TRAPEZOIDAL: 4}
_CUT_EPS = 1e-12


def _check_finite(x: float, what: str = "invalid input value") -> float:
    try:
        xf = float(x)
    except (TypeError, ValueError):
        raise FuzzyError(what) from None
    if not math.isfinite(xf):
        raise FuzzyError(what)
    return xf


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular ``(a, b, c)`` or trapezoidal ``(a, b, c, d)`` membership function.

    Degenerate edges (``a == b`` or ``c == d``) are allowed and behave as
    vertical shoulders: membership is 1 at the coinciding point.
    """

    shape: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise FuzzyError(f"unknown membership shape {self.shape!r}")
        params = tuple(_check_finite(p, "non-finite membership parameter") for p in self.params)
        if len(params) != SHAPES[self.shape]:
            raise FuzzyError(
                f"{self.shape} membership function needs {SHAPES[self.shape]} parameters, "
                f"got {len(params)}"
            )
        if any(p > q for p, q in zip(params, params[1:])):
            raise FuzzyError(f"membership parameters must be nondecreasing: {params}")
        object.__setattr__(self, "params", params)

    @classmethod
    def triangular(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls(TRIANGULAR, (a, b, c))

    @classmethod
    def trapezoidal(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls(TRAPEZOIDAL, (a, b, c, d))

    def abcd(self) -> tuple[float, float, float, float]:
        p = self.params
        if self.shape == TRIANGULAR:
            return p[0], p[1], p[1], p[2]
        return p[0], p[1], p[2], p[3]

    @property
    def support(self) -> Interval:
        a, _, _, d = self.abcd()
        return a, d

    @property
    def core(self) -> Interval:
        _, b, c, _ = self.abcd()
        return b, c

    @property
    def peak(self) -> float:
        """Midpoint of the core; used to order terms along the universe."""
        b, c = self.core
        return (b + c) / 2.0

    def __call__(self, x):
        a, b, c, d = self.abcd()
        if isinstance(x, (int, float)):
            if x < a or x > d:
                return 0.0
            if x < b:
                return (x - a) / (b - a)
            if x <= c:
                return 1.0
            return (d - x) / (d - c)
        arr = np.asarray(x, dtype=float)
        y = np.zeros_like(arr)
        rising = (arr >= a) & (arr < b)
        y[rising] = (arr[rising] - a) / (b - a)
        y[(arr >= b) & (arr <= c)] = 1.0
        falling = (arr > c) & (arr <= d)
        y[falling] = (d - arr[falling]) / (d - c)
        if y.ndim == 0:
            return float(y)
        return y

    def to_fuzzy_set(self, universe: Interval | None = None) -> "PiecewiseLinear":
        a, b, c, d = self.abcd()
        return PiecewiseLinear.from_points([(a, 0.0), (b, 1.0), (c, 1.0), (d, 0.0)], universe)

    def describe(self) -> str:
        name = "Tri" if self.shape == TRIANGULAR else "Trap"
        return f"{name}({', '.join(f'{p:g}' for p in self.params)})"


def eval_membership(mf: MembershipFunction, x: float) -> float:
    """Degree of membership of a single crisp value."""
    return mf(_check_finite(x))


def _check_alpha(alpha: float) -> float:
    try:
        a = float(alpha)
    except (TypeError, ValueError):
        raise FuzzyError("alpha out of range") from None
    if not (0.0 < a <= 1.0):
        raise FuzzyError("alpha out of range")
    return a


@dataclass(frozen=True)
class AlphaCut:
    """A finite union of disjoint closed intervals, sorted ascending."""

    intervals: tuple[Interval, ...] = ()

    @classmethod
    def from_intervals(cls, intervals: Iterable[Interval], tol: float = 0.0) -> "AlphaCut":
        """Normalize: sort, then merge intervals that overlap, touch, or sit within ``tol``."""
        items = sorted((float(lo), float(hi)) for lo, hi in intervals if lo <= hi)
        merged: list[list[float]] = []
        for lo, hi in items:
            if merged and lo <= merged[-1][1] + tol:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in merged))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __contains__(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def union(self, other: "AlphaCut") -> "AlphaCut":
        return AlphaCut.from_intervals(self.intervals + other.intervals)

    def intersection(self, other: "AlphaCut") -> "AlphaCut":
        out = []
        for lo1, hi1 in self.intervals:
            for lo2, hi2 in other.intervals:
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if lo <= hi:
                    out.append((lo, hi))
        return AlphaCut.from_intervals(out)

    def issubset(self, other: "AlphaCut", tol: float = 0.0) -> bool:
        return all(
            any(lo2 - tol <= lo and hi <= hi2 + tol for lo2, hi2 in other.intervals)
            for lo, hi in self.intervals
        )

    def approx_equal(self, other: "AlphaCut", tol: float = 1e-9) -> bool:
        a = AlphaCut.from_intervals(self.intervals, tol)
        b = AlphaCut.from_intervals(other.intervals, tol)
        if len(a.intervals) != len(b.intervals):
            return False
        return all(
            abs(x1 - x2) <= tol and abs(y1 - y2) <= tol
            for (x1, y1), (x2, y2) in zip(a.intervals, b.intervals)
        )


def alpha_cut(mf: Union[MembershipFunction, "PiecewiseLinear"], alpha: float) -> AlphaCut:
    """``{x : mu(x) >= alpha}`` in closed form."""
    alpha = _check_alpha(alpha)
    if isinstance(mf, PiecewiseLinear):
        return mf.alpha_cut(alpha)
    a, b, c, d = mf.abcd()
    lo = min(a + alpha * (b - a), b)
    hi = max(c + (1.0 - alpha) * (d - c), c)
    return AlphaCut(((lo, hi),))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear membership function with possible jumps at knots.

    At knot ``xs[k]`` the function has left limit ``left[k]``, value
    ``value[k]`` and right limit ``right[k]``; between knots it is linear from
    ``right[k]`` to ``left[k+1]``. It is zero outside ``[xs[0], xs[-1]]``.
    Values are kept upper semicontinuous (value >= both limits) so that every
    alpha-cut is closed.
    """

    xs: tuple[float, ...]
    left: tuple[float, ...]
    value: tuple[float, ...]
    right: tuple[float, ...]
    universe: Interval | None = None

    @classmethod
    def empty(cls, universe: Interval | None = None) -> "PiecewiseLinear":
        return cls((), (), (), (), universe)

    @classmethod
    def from_points(cls, points: Sequence[tuple[float, float]], universe: Interval | None = None):
        """Build from an x-sorted polyline; repeated x values encode a jump."""
        xs: list[float] = []
        left: list[float] = []
        value: list[float] = []
        right: list[float] = []
        for x, y in points:
            if xs and x == xs[-1]:
                right[-1] = y
                value[-1] = max(value[-1], y)
            else:
                if xs and x < xs[-1]:
                    raise FuzzyError("polyline points must be sorted by x")
                xs.append(x)
                left.append(y)
                value.append(y)
                right.append(y)
        return cls(tuple(xs), tuple(left), tuple(value), tuple(right), universe)

    def limits(self, x: float) -> tuple[float, float, float]:
        """(left limit, value, right limit) at ``x``."""
        xs = self.xs
        if not xs or x < xs[0] or x > xs[-1]:
            return 0.0, 0.0, 0.0
        k = bisect.bisect_left(xs, x)
        if xs[k] == x:
            left = self.left[k] if k > 0 else 0.0
            right = self.right[k] if k < len(xs) - 1 else 0.0
            return left, self.value[k], right
        x0, x1 = xs[k - 1], xs[k]
        y0, y1 = self.right[k - 1], self.left[k]
        y = y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return y, y, y

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.zeros_like(arr)
        xs = np.asarray(self.xs, dtype=float)
        if xs.size:
            k = np.searchsorted(xs, arr, side="right") - 1
            inner = (k >= 0) & (k < xs.size - 1)
            ki = k[inner]
            x0, x1 = xs[ki], xs[ki + 1]
            y0 = np.asarray(self.right)[ki]
            y1 = np.asarray(self.left)[ki + 1]
            out[inner] = y0 + (y1 - y0) * (arr[inner] - x0) / (x1 - x0)
            on_knot = (k >= 0) & (xs[np.clip(k, 0, None)] == arr)
            out[on_knot] = np.asarray(self.value)[k[on_knot]]
        if out.ndim == 0:
            return float(out)
        return out

    @property
    def height(self) -> float:
        return max(self.value, default=0.0)

    @property
    def support_hull(self) -> Interval | None:
        """Smallest closed interval outside which membership is zero."""
        n = len(self.xs)
        lo = hi = None
        for i in range(n):
            if self.value[i] > 0:
                lo = self.xs[i] if lo is None else lo
                hi = self.xs[i]
            if i < n - 1 and (self.right[i] > 0 or self.left[i + 1] > 0):
                lo = self.xs[i] if lo is None else lo
                hi = self.xs[i + 1]
        return None if lo is None else (lo, hi)

    def alpha_cut(self, alpha: float) -> AlphaCut:
        alpha = _check_alpha(alpha)
        # Crossing knots are computed, so their values may sit an ulp below alpha.
        level = alpha - _CUT_EPS
        xs = self.xs
        pieces: list[Interval] = []
        for k, x in enumerate(xs):
            if self.value[k] >= level:
                pieces.append((x, x))
        for k in range(len(xs) - 1):
            x0, x1 = xs[k], xs[k + 1]
            y0, y1 = self.right[k], self.left[k + 1]
            if y0 >= level and y1 >= level:
                pieces.append((x0, x1))
            elif y0 >= level:
                t = x0 + (x1 - x0) * (y0 - alpha) / (y0 - y1)
                pieces.append((x0, min(max(t, x0), x1)))
            elif y1 >= level:
                t = x0 + (x1 - x0) * (alpha - y0) / (y1 - y0)
                pieces.append((min(max(t, x0), x1), x1))
        return AlphaCut.from_intervals(pieces)

    def to_points(self) -> list[tuple[float, float]]:
        """Polyline (with duplicated x at jumps) suitable for plotting."""
        pts: list[tuple[float, float]] = []
        for k, x in enumerate(self.xs):
            left = self.left[k] if k > 0 else 0.0
            right = self.right[k] if k < len(self.xs) - 1 else 0.0
            for y in (left, self.value[k], right):
                if not pts or pts[-1] != (x, y):
                    pts.append((x, y))
        return pts


FuzzySetLike = Union[MembershipFunction, PiecewiseLinear]


def _as_pl(f: FuzzySetLike) -> PiecewiseLinear:
    if isinstance(f, PiecewiseLinear):
        return f
    if isinstance(f, MembershipFunction):
        return f.to_fuzzy_set()
    raise TypeError(f"expected a membership function or piecewise-linear set, got {type(f).__name__}")


def _common_universe(f: PiecewiseLinear, g: PiecewiseLinear) -> Interval | None:
    if f.universe is not None and g.universe is not None and tuple(f.universe) != tuple(g.universe):
        raise FuzzyError("universe mismatch")
    return f.universe if f.universe is not None else g.universe


def _combine(f: PiecewiseLinear, g: PiecewiseLinear, op: Callable[[float, float], float],
             universe: Interval | None) -> PiecewiseLinear:
    knots = sorted(set(f.xs) | set(g.xs))
    # Insert points where f - g changes sign strictly inside a knot interval.
    crossings = []
    for p, q in zip(knots, knots[1:]):
        fr, gr = f.limits(p)[2], g.limits(p)[2]
        fl, gl = f.limits(q)[0], g.limits(q)[0]
        d0, d1 = fr - gr, fl - gl
        if d0 * d1 < 0:
            t = p + (q - p) * d0 / (d0 - d1)
            if p < t < q:
                crossings.append(t)
    knots = sorted(set(knots) | set(crossings))
    xs, left, value, right = [], [], [], []
    for x in knots:
        fl, fv, fr = f.limits(x)
        gl, gv, gr = g.limits(x)
        xs.append(x)
        left.append(op(fl, gl))
        value.append(op(fv, gv))
        right.append(op(fr, gr))
    return PiecewiseLinear(tuple(xs), tuple(left), tuple(value), tuple(right), universe)


def pointwise_union(f: FuzzySetLike, g: FuzzySetLike) -> PiecewiseLinear:
    """``x -> max(f(x), g(x))``."""
    f, g = _as_pl(f), _as_pl(g)
    return _combine(f, g, max, _common_universe(f, g))


def pointwise_intersection(f: FuzzySetLike, g: FuzzySetLike) -> PiecewiseLinear:
    """``x -> min(f(x), g(x))``."""
    f, g = _as_pl(f), _as_pl(g)
    return _combine(f, g, min, _common_universe(f, g))


def clip(mf: FuzzySetLike, height: float) -> PiecewiseLinear:
    """``x -> min(mu(x), height)`` (Mamdani min-implication)."""
    try:
        h = float(height)
    except (TypeError, ValueError):
        raise FuzzyError("invalid clip height") from None
    if not (0.0 <= h <= 1.0):
        raise FuzzyError("invalid clip height")
    f = _as_pl(mf)
    if not f.xs:
        return f
    flat = PiecewiseLinear(
        (f.xs[0], f.xs[-1]) if len(f.xs) > 1 else (f.xs[0],),
        (h,) * min(2, len(f.xs)),
        (h,) * min(2, len(f.xs)),
        (h,) * min(2, len(f.xs)),
    )
    return _combine(f, flat, min, f.universe)


def midpoints(universe: Interval, resolution: int) -> np.ndarray:
    lo, hi = universe
    step = (hi - lo) / resolution
    return lo + step * (np.arange(resolution) + 0.5)


def centroid(f: Callable, universe: Interval, resolution: int = 1000) -> float:
    """Centre of area of ``f`` over ``universe`` by the midpoint rule."""
    if isinstance(resolution, bool) or not isinstance(resolution, (int, np.integer)) or resolution < 2:
        raise FuzzyError("invalid resolution")
    xs = midpoints(universe, int(resolution))
    ys = np.asarray(f(xs), dtype=float)
    if np.any(ys < 0) or not np.all(np.isfinite(ys)):
        raise FuzzyError("membership values must be finite and nonnegative")
    area = ys.sum()
    if area <= 0:
        raise InferenceError("empty aggregate, no rule fired")
    return float((xs * ys).sum() / area)


@dataclass(frozen=True)
class FuzzyTerm:
    label: str
    mf: MembershipFunction

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label.strip():
            raise FuzzyError("term label must be a non-empty string")


@dataclass(frozen=True)
class LinguisticVariable:
    """Named universe with an ordered (low to high) list of terms."""

    name: str
    universe: Interval
    terms: tuple[FuzzyTerm, ...]
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise FuzzyError("variable name must be non-empty")
        lo, hi = (_check_finite(v, "non-finite universe bound") for v in self.universe)
        if not lo < hi:
            raise FuzzyError(f"{self.name}: universe needs lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "universe", (lo, hi))
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise FuzzyError(f"{self.name}: at least one term required")
        labels = [t.label for t in self.terms]
        if len(set(labels)) != len(labels):
            raise FuzzyError(f"{self.name}: duplicate term labels in {labels}")
        for t in self.terms:
            a, d = t.mf.support
            if a < lo or d > hi:
                raise FuzzyError(
                    f"{self.name}: support of {t.label} [{a:g}, {d:g}] leaves universe [{lo:g}, {hi:g}]"
                )

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    def term(self, label: str) -> FuzzyTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise FuzzyError(f"{self.name}: unknown term {label!r}")

    def rank(self, label: str) -> int:
        return self.labels.index(self.term(label).label)

    def fuzzy_set(self, label: str) -> PiecewiseLinear:
        return self.term(label).mf.to_fuzzy_set(self.universe)

    def contains(self, x: float) -> bool:
        lo, hi = self.universe
        return lo <= x <= hi

    def clamp(self, x: float) -> float:
        lo, hi = self.universe
        return min(max(x, lo), hi)


def coverage_gaps(variable: LinguisticVariable) -> list[Interval]:
    """Intervals of the universe where no term has positive membership.

    Exact for piecewise-linear terms: every term is linear between
    consecutive breakpoints, so testing breakpoints and the midpoints between
    them decides coverage everywhere.
    """
    lo, hi = variable.universe
    points = {lo, hi}
    for t in variable.terms:
        points.update(p for p in t.mf.params if lo <= p <= hi)
    pts = sorted(points)

    def covered(x: float) -> bool:
        return any(t.mf(x) > 0 for t in variable.terms)

    gaps: list[Interval] = []
    for i, x in enumerate(pts):
        if not covered(x):
            gaps.append((x, x))
        if i + 1 < len(pts) and not covered((x + pts[i + 1]) / 2):
            gaps.append((x, pts[i + 1]))
    return list(AlphaCut.from_intervals(gaps).intervals)
