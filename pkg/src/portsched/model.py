"""Evaluation data, schedules, and the success-probability estimator.

Times are integer Mi (2**20 instructions). A missing solution is ``math.inf``
in memory and is never written to files as a number.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Union

INF = math.inf

CSV_HEADER = ("strategy", "problem", "status", "time")


class ParseError(ValueError):
    """Malformed evaluation data; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Status(str, enum.Enum):
    SOL = "SOL"
    GUP = "GUP"
    TMO = "TMO"


@dataclass(frozen=True, order=True)
class Observation:
    status: Status
    time: int

    def __post_init__(self):
        if not isinstance(self.status, Status):
            object.__setattr__(self, "status", Status(self.status))
        if isinstance(self.time, bool) or not isinstance(self.time, int) or self.time < 0:
            raise ValueError(f"observation time must be a nonnegative integer, got {self.time!r}")


ObservationSet = tuple  # tuple[Observation, ...]; a multiset, order irrelevant


class EvaluationMatrix:
    """Sparse (strategy, problem) -> observation multiset.

    Strategy and problem ids are kept sorted; an absent cell means no
    information. ``time(s, p)`` is the deterministic view: the fastest SOL
    runtime of the cell, or ``INF``.
    """

    def __init__(
        self,
        strategies: Iterable[str] = (),
        problems: Iterable[str] = (),
        cells: Mapping[tuple[str, str], Iterable[Observation]] | None = None,
    ):
        cells = dict(cells or {})
        strategies = set(strategies)
        problems = set(problems)
        for s, p in cells:
            strategies.add(s)
            problems.add(p)
        for ident in strategies | problems:
            if not isinstance(ident, str) or not ident:
                raise ValueError(f"ids must be nonempty strings, got {ident!r}")
        self.strategies: tuple[str, ...] = tuple(sorted(strategies))
        self.problems: tuple[str, ...] = tuple(sorted(problems))
        self._cells: dict[tuple[str, str], tuple[Observation, ...]] = {
            key: tuple(sorted(obs)) for key, obs in cells.items()
        }
        solved: dict[str, dict[str, int]] = {s: {} for s in self.strategies}
        for (s, p), obs in self._cells.items():
            times = [o.time for o in obs if o.status is Status.SOL]
            if times:
                solved[s][p] = min(times)
        self._solved = solved

    def __repr__(self):
        return (
            f"EvaluationMatrix({len(self.strategies)} strategies, "
            f"{len(self.problems)} problems, {len(self._cells)} cells)"
        )

    def __eq__(self, other):
        if not isinstance(other, EvaluationMatrix):
            return NotImplemented
        return (
            self.strategies == other.strategies
            and self.problems == other.problems
            and self._cells == other._cells
        )

    def observations(self, strategy: str, problem: str) -> tuple[Observation, ...]:
        return self._cells.get((strategy, problem), ())

    def cells(self):
        """Yield ``((strategy, problem), observations)`` in sorted key order."""
        for key in sorted(self._cells):
            yield key, self._cells[key]

    def time(self, strategy: str, problem: str) -> float:
        return self.solved_by(strategy).get(problem, INF)

    def solved_by(self, strategy: str) -> dict[str, int]:
        """Problems solved by ``strategy`` mapped to the deterministic solve time."""
        try:
            return self._solved[strategy]
        except KeyError:
            raise KeyError(f"unknown strategy {strategy!r}") from None

    def candidate_times(self, strategy: str) -> list[int]:
        return sorted(set(self.solved_by(strategy).values()))

    def restrict(self, strategies: Iterable[str] | None = None, problems: Iterable[str] | None = None):
        keep_s = set(self.strategies) if strategies is None else set(strategies)
        keep_p = set(self.problems) if problems is None else set(problems)
        unknown = keep_s - set(self.strategies)
        if unknown:
            raise KeyError(f"unknown strategies {sorted(unknown)}")
        keep_p &= set(self.problems)
        cells = {k: v for k, v in self._cells.items() if k[0] in keep_s and k[1] in keep_p}
        return EvaluationMatrix(keep_s, keep_p, cells)


@dataclass(frozen=True)
class Slice:
    strategy: str
    limit: int

    def __post_init__(self):
        if isinstance(self.limit, bool) or not isinstance(self.limit, int) or self.limit < 1:
            raise ValueError(f"slice limit must be a positive integer, got {self.limit!r}")


@dataclass(frozen=True)
class Schedule:
    slices: tuple[Slice, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))

    def __iter__(self):
        return iter(self.slices)

    def __len__(self):
        return len(self.slices)

    @property
    def total(self) -> int:
        return sum(sl.limit for sl in self.slices)

    def max_limits(self) -> dict[str, int]:
        limits: dict[str, int] = {}
        for sl in self.slices:
            limits[sl.strategy] = max(limits.get(sl.strategy, 0), sl.limit)
        return limits

    def pairs(self) -> list[tuple[str, int]]:
        return [(sl.strategy, sl.limit) for sl in self.slices]


@dataclass(frozen=True)
class PreSchedule:
    """Unordered time assignment; zero entries are dropped."""

    limits: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for s, t in self.limits.items():
            if isinstance(t, bool) or not isinstance(t, int) or t < 0:
                raise ValueError(f"limit for {s!r} must be a nonnegative integer, got {t!r}")
            if t > 0:
                clean[s] = t
        object.__setattr__(self, "limits", dict(sorted(clean.items())))

    def __eq__(self, other):
        if isinstance(other, PreSchedule):
            return self.limits == other.limits
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.limits.items()))

    @property
    def total(self) -> int:
        return sum(self.limits.values())

    def max_limits(self) -> dict[str, int]:
        return dict(self.limits)

    def as_schedule(self) -> Schedule:
        return Schedule(tuple(Slice(s, t) for s, t in self.limits.items()))


AnySchedule = Union[Schedule, PreSchedule]


# -- success probability -------------------------------------------------


@dataclass(frozen=True)
class SuccessEstimate:
    """Ratio of successful to informative observations, kept unreduced."""

    successes: int
    informative: int

    @property
    def unknown(self) -> bool:
        return self.informative == 0

    @property
    def value(self) -> Fraction:
        if self.informative == 0:
            return Fraction(0)
        return Fraction(self.successes, self.informative)

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return f"{self.successes}/{self.informative}"


def estimate_success_probability(obs: Iterable[Observation], limit: int) -> SuccessEstimate:
    """Estimate the chance that a new run with time limit ``limit`` solves the problem.

    An observation (status, t) counts as a success when status is SOL and
    ``limit > t``; it is informative unless it is a TMO with ``t < limit``.
    With no informative observation the estimate is 0 and ``unknown`` is set.
    """
    successes = informative = 0
    for o in obs:
        if limit > o.time and o.status is Status.SOL:
            successes += 1
        if limit <= o.time or o.status is not Status.TMO:
            informative += 1
    return SuccessEstimate(successes, informative)


def schedule_success_probability(
    schedule: Iterable[Slice | tuple[str, int]],
    cells: Mapping[str, Iterable[Observation]],
) -> Fraction:
    """1 - prod(1 - P_SOL) over the slices, for a single problem.

    ``cells`` maps strategy id to its observations on the problem; strategies
    missing from it contribute nothing.
    """
    fail = Fraction(1)
    for item in schedule:
        s, t = (item.strategy, item.limit) if isinstance(item, Slice) else item
        obs = cells.get(s)
        if not obs:
            continue
        fail *= 1 - estimate_success_probability(obs, t).value
    return 1 - fail


# -- simulation ----------------------------------------------------------


def simulate_schedule(schedule: AnySchedule, matrix: EvaluationMatrix) -> frozenset[str]:
    """Problems solved by some slice within its limit (deterministic view)."""
    solved: set[str] = set()
    for s, t in schedule.max_limits().items():
        solved.update(p for p, d in matrix.solved_by(s).items() if d <= t)
    return frozenset(solved)


def vbss_times(matrix: EvaluationMatrix) -> dict[str, float]:
    best = {p: INF for p in matrix.problems}
    for s in matrix.strategies:
        for p, d in matrix.solved_by(s).items():
            if d < best[p]:
                best[p] = d
    return best


# -- file formats --------------------------------------------------------


def _parse_time(text: str, lineno: int) -> int:
    text = text.strip()
    if not text.isdigit() or not text.isascii():
        raise ParseError(f"time must be a nonnegative integer, got {text!r}", lineno)
    return int(text)


def load_matrix(source: IO[str] | str) -> EvaluationMatrix:
    """Read the evaluation CSV (``strategy,problem,status,time``)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header", 1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(f"header must be {','.join(CSV_HEADER)!r}", 1)
    cells: dict[tuple[str, str], list[Observation]] = {}
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", lineno)
        row = [c.strip() for c in row]
        if tuple(row) == CSV_HEADER:
            raise ParseError("duplicate header", lineno)
        s, p, status, time = row
        if not s or not p:
            raise ParseError("empty strategy or problem id", lineno)
        try:
            status = Status(status)
        except ValueError:
            raise ParseError(f"unknown status {status!r}", lineno) from None
        cells.setdefault((s, p), []).append(Observation(status, _parse_time(time, lineno)))
    return EvaluationMatrix(cells=cells)


def dump_matrix(matrix: EvaluationMatrix, out: IO[str] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for (s, p), obs in matrix.cells():
        for o in obs:
            writer.writerow((s, p, o.status.value, o.time))
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def matrix_to_json(matrix: EvaluationMatrix) -> dict:
    return {
        "strategies": list(matrix.strategies),
        "problems": list(matrix.problems),
        "cells": [
            {
                "strategy": s,
                "problem": p,
                "obs": [{"status": o.status.value, "time": o.time} for o in obs],
            }
            for (s, p), obs in matrix.cells()
        ],
    }


def matrix_from_json(data: Mapping) -> EvaluationMatrix:
    try:
        cells = {}
        for cell in data.get("cells", []):
            key = (cell["strategy"], cell["problem"])
            cells.setdefault(key, []).extend(
                Observation(Status(o["status"]), o["time"]) for o in cell["obs"]
            )
        return EvaluationMatrix(data.get("strategies", []), data.get("problems", []), cells)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad matrix JSON: {exc}") from exc


def read_matrix_file(path) -> EvaluationMatrix:
    path = str(path)
    with open(path, encoding="utf-8", newline="") as fh:
        if path.endswith(".json"):
            try:
                return matrix_from_json(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), exc.lineno) from exc
        return load_matrix(fh)


def schedule_to_json(schedule: AnySchedule) -> dict:
    if isinstance(schedule, PreSchedule):
        schedule = schedule.as_schedule()
    return {
        "slices": [{"strategy": sl.strategy, "limit": sl.limit} for sl in schedule.slices],
        "total": schedule.total,
    }


def schedule_from_json(data: Mapping) -> Schedule:
    try:
        return Schedule(tuple(Slice(d["strategy"], d["limit"]) for d in data["slices"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad schedule JSON: {exc}") from exc


def schedule_to_text(schedule: AnySchedule) -> str:
    if isinstance(schedule, PreSchedule):
        schedule = schedule.as_schedule()
    return "".join(f"{sl.strategy} {sl.limit}\n" for sl in schedule.slices)


def schedule_from_text(text: str) -> Schedule:
    slices = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected 'strategy limit'", lineno)
        slices.append(Slice(parts[0], _parse_time(parts[1], lineno)))
    return Schedule(tuple(slices))
