"""Reference constructors and cumulative-performance curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .greedy import Journal
from .model import EvaluationMatrix, PreSchedule, Schedule, Slice, simulate_schedule, vbss_times


@dataclass(frozen=True)
class PSetheoParams:
    dt: int
    l: int  # noqa: E741 - quantization parameter
    budget: int

    def __post_init__(self):
        if self.dt < 1:
            raise ValueError(f"dt must be >= 1, got {self.dt}")
        if self.l < 1:
            raise ValueError(f"l must be >= 1, got {self.l}")
        if self.budget < 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget}")


class CurvePoint(NamedTuple):
    time: int
    solved: int


def psetheo(matrix: EvaluationMatrix, params: PSetheoParams) -> PreSchedule:
    """Step-quantized greedy: extend by ``dt`` the strategy gaining the most problems.

    When no extension gains anything, ``dt`` grows by ``ceil(budget / l)``.
    An extension that would exceed the budget is never started.
    """
    limits = dict.fromkeys(matrix.strategies, 0)
    coverable = {p for p, t in vbss_times(matrix).items() if t < math.inf}
    covered: set[str] = set()
    step = math.ceil(params.budget / params.l)
    dt = params.dt
    total = 0
    while covered != coverable and total + dt <= params.budget:
        best, best_gain = None, 0
        for s in matrix.strategies:
            horizon = limits[s] + dt
            gain = sum(1 for p, d in matrix.solved_by(s).items() if d <= horizon and p not in covered)
            if gain > best_gain:
                best, best_gain = s, gain
        if best is None:
            dt += step
            continue
        limits[best] += dt
        total += dt
        covered.update(p for p, d in matrix.solved_by(best).items() if d <= limits[best])
    return PreSchedule(limits)


def bucket_schedule(matrix: EvaluationMatrix, bucket: int, budget: int) -> Schedule:
    """Equal slices of ``bucket`` Mi, each strategy at most once, most new problems first."""
    if bucket < 1:
        raise ValueError(f"bucket must be >= 1, got {bucket}")
    unused = list(matrix.strategies)
    covered: set[str] = set()
    slices = []
    while unused and (len(slices) + 1) * bucket <= budget:
        best, best_gain = None, 0
        for s in unused:
            gain = sum(1 for p, d in matrix.solved_by(s).items() if d <= bucket and p not in covered)
            if gain > best_gain:
                best, best_gain = s, gain
        if best is None:
            break
        unused.remove(best)
        covered.update(p for p, d in matrix.solved_by(best).items() if d <= bucket)
        slices.append(Slice(best, bucket))
    return Schedule(tuple(slices))


def vbss_curve(matrix: EvaluationMatrix) -> list[CurvePoint]:
    times = sorted(t for t in vbss_times(matrix).values() if t < math.inf)
    points: list[CurvePoint] = []
    for i, t in enumerate(times, 1):
        if points and points[-1].time == t:
            points[-1] = CurvePoint(t, i)
        else:
            points.append(CurvePoint(t, i))
    return points


def schedule_curve(source: Journal | Schedule | PreSchedule, matrix: EvaluationMatrix) -> list[CurvePoint]:
    """Cumulative (time, solved) points after each journal entry or schedule slice."""
    if isinstance(source, Journal):
        points, solved = [], 0
        for e in source.entries:
            solved += len(e.newly_covered)
            points.append(CurvePoint(e.cumulative, solved))
        return points
    if isinstance(source, PreSchedule):
        source = source.as_schedule()
    points, elapsed, limits = [], 0, {}
    covered: set[str] = set()
    for sl in source.slices:
        elapsed += sl.limit
        if sl.limit > limits.get(sl.strategy, 0):
            limits[sl.strategy] = sl.limit
            covered |= simulate_schedule(PreSchedule({sl.strategy: sl.limit}), matrix)
        points.append(CurvePoint(elapsed, len(covered)))
    return points


def curve_value(curve: list[CurvePoint], time: float) -> int:
    """Step-function reading: solved count of the last point at or before ``time``."""
    value = 0
    for pt in curve:
        if pt.time > time:
            break
        value = pt.solved
    return value


def curve_to_csv(curve: Iterable[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("time", "solved"))
    writer.writerows(curve)
    return buf.getvalue()
