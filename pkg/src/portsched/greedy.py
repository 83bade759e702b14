"""Greedy schedule construction.

The base loop repeatedly picks the (strategy, limit) pair with the best
reward per additionally claimed time. Three regularizations are layered on
top and compose freely:

* slack: emitted limits become ``round(t * w) + b``; the budget is checked
  against the inflated total while selection still works on raw times;
* reward exponent ``alpha``: the criterion is ``reward ** alpha / dt``;
* diminishing rewards ``beta``: a problem already covered ``k`` times
  contributes ``beta ** k`` (with ``0 ** 0 == 1``).

Ties are broken by smaller ``dt``, then strategy id, then limit.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .model import (
    AnySchedule,
    EvaluationMatrix,
    ParseError,
    PreSchedule,
    Schedule,
    Slice,
    estimate_success_probability,
)

_REL_TOL = 1e-12


class ExtensionMode(str, enum.Enum):
    FULL = "full"
    CONSERVATIVE = "conservative"
    NONE = "none"


@dataclass(frozen=True)
class RegularizationParams:
    slack_mul: float = 1.0
    slack_add: int = 0
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.slack_mul >= 1:
            raise ValueError(f"slack_mul must be >= 1, got {self.slack_mul}")
        if isinstance(self.slack_add, bool) or not isinstance(self.slack_add, int) or self.slack_add < 0:
            raise ValueError(f"slack_add must be a nonnegative integer, got {self.slack_add!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    def emitted(self, t: int) -> int:
        """Slack-inflated limit; zero stays zero. Rounds half up."""
        if t == 0:
            return 0
        if self.slack_mul == 1:
            return t + self.slack_add
        return math.floor(t * self.slack_mul + 0.5) + self.slack_add

    def weight(self, k: int) -> float:
        return 1.0 if k == 0 else self.beta**k


BASE = RegularizationParams()


@dataclass(frozen=True)
class JournalEntry:
    strategy: str
    new_limit: int
    delta: int
    cumulative: int
    newly_covered: tuple[str, ...]
    criterion: float


@dataclass(frozen=True)
class Journal:
    """Iteration log of a construction run.

    ``new_limit`` and ``delta`` are raw times; ``cumulative`` is the
    slack-inflated total after the step, which is what budgets bound.
    """

    entries: tuple[JournalEntry, ...] = ()
    mode: ExtensionMode = ExtensionMode.FULL
    slack_mul: float = 1.0
    slack_add: int = 0

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "slack_mul": self.slack_mul,
            "slack_add": self.slack_add,
            "entries": [
                {
                    "strategy": e.strategy,
                    "new_limit": e.new_limit,
                    "delta": e.delta,
                    "cumulative": e.cumulative,
                    "newly_covered": list(e.newly_covered),
                    "criterion": e.criterion,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Journal":
        try:
            entries = tuple(
                JournalEntry(
                    e["strategy"],
                    int(e["new_limit"]),
                    int(e["delta"]),
                    int(e["cumulative"]),
                    tuple(e["newly_covered"]),
                    float(e["criterion"]),
                )
                for e in data["entries"]
            )
            return cls(
                entries,
                ExtensionMode(data.get("mode", "full")),
                float(data.get("slack_mul", 1.0)),
                int(data.get("slack_add", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad journal JSON: {exc}") from exc


def criterion(reward: float, delta: int, alpha: float = 1.0) -> float:
    """Selection score of a candidate: ``reward ** alpha / delta``."""
    return reward**alpha / delta


def _beats(crit, key, best_crit, best_key) -> bool:
    if best_key is None:
        return True
    if math.isclose(crit, best_crit, rel_tol=_REL_TOL, abs_tol=0.0):
        return key < best_key
    return crit > best_crit


def construct_greedy(
    matrix: EvaluationMatrix,
    budget: int | None = None,
    params: RegularizationParams = BASE,
    mode: ExtensionMode | str = ExtensionMode.FULL,
) -> tuple[AnySchedule, Journal]:
    """Greedy schedule under ``budget`` (``None`` means unbounded).

    FULL mode returns a PreSchedule; CONSERVATIVE and NONE return a Schedule
    in construction order, possibly with repeated strategies.
    """
    if budget is not None and budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    mode = ExtensionMode(mode)
    emitted = params.emitted

    # per strategy: solve times ascending, and the problems solved at each
    by_time: dict[str, tuple[list[int], list[list[str]]]] = {}
    for s in matrix.strategies:
        groups: dict[int, list[str]] = {}
        for p, d in matrix.solved_by(s).items():
            groups.setdefault(d, []).append(p)
        times = sorted(groups)
        by_time[s] = (times, [sorted(groups[t]) for t in times])

    cover = dict.fromkeys(matrix.problems, 0)
    reached = dict.fromkeys(matrix.strategies, 0)
    slices: list[list] = []  # [strategy, raw limit]
    slot: dict[str, int] = {}  # FULL mode: strategy -> index in slices
    used = 0
    entries: list[JournalEntry] = []

    while True:
        best_crit, best_key = 0.0, None
        for s in matrix.strategies:
            times, groups = by_time[s]
            lo = reached[s]
            if mode is ExtensionMode.FULL:
                extending = lo > 0
            elif mode is ExtensionMode.CONSERVATIVE:
                extending = bool(slices) and slices[-1][0] == s
            else:
                extending = False
            base_raw = lo if extending else 0
            base_cost = emitted(lo) if extending else 0
            reward = 0.0
            for i in range(bisect.bisect_right(times, lo), len(times)):
                t = times[i]
                cost = emitted(t) - base_cost
                if budget is not None and used + cost > budget:
                    break
                reward += sum(params.weight(cover[p]) for p in groups[i])
                if reward <= 0:
                    continue
                delta = t - base_raw
                crit = criterion(reward, delta, params.alpha)
                key = (delta, s, t)
                if _beats(crit, key, best_crit, best_key):
                    best_crit, best_key = crit, key
        if best_key is None:
            break

        delta, s, t = best_key
        times, groups = by_time[s]
        lo = reached[s]
        newly = []
        for i in range(bisect.bisect_right(times, lo), bisect.bisect_right(times, t)):
            for p in groups[i]:
                if cover[p] == 0:
                    newly.append(p)
                cover[p] += 1
        if mode is ExtensionMode.FULL and s in slot:
            used += emitted(t) - emitted(slices[slot[s]][1])
            slices[slot[s]][1] = t
        elif mode is ExtensionMode.CONSERVATIVE and slices and slices[-1][0] == s:
            used += emitted(t) - emitted(slices[-1][1])
            slices[-1][1] = t
        else:
            slot[s] = len(slices)
            slices.append([s, t])
            used += emitted(t)
        reached[s] = t
        entries.append(JournalEntry(s, t, delta, used, tuple(sorted(newly)), best_crit))

    journal = Journal(tuple(entries), mode, params.slack_mul, params.slack_add)
    return _materialize(slices, mode, params), journal


def _materialize(slices, mode: ExtensionMode, params: RegularizationParams) -> AnySchedule:
    if mode is ExtensionMode.FULL:
        return PreSchedule({s: params.emitted(t) for s, t in slices})
    return Schedule(tuple(Slice(s, params.emitted(t)) for s, t in slices))


def replay_journal(journal: Journal, budget: int) -> AnySchedule:
    """Schedule after the longest journal prefix whose cumulative time fits ``budget``."""
    slices: list[list] = []
    slot: dict[str, int] = {}
    for e in journal.entries:
        if e.cumulative > budget:
            break
        if journal.mode is ExtensionMode.FULL and e.strategy in slot:
            slices[slot[e.strategy]][1] = e.new_limit
        elif journal.mode is ExtensionMode.CONSERVATIVE and slices and slices[-1][0] == e.strategy:
            slices[-1][1] = e.new_limit
        else:
            slot[e.strategy] = len(slices)
            slices.append([e.strategy, e.new_limit])
    params = RegularizationParams(slack_mul=journal.slack_mul, slack_add=journal.slack_add)
    return _materialize(slices, journal.mode, params)


def construct_probabilistic(
    matrix: EvaluationMatrix,
    budget: int,
    params: RegularizationParams = BASE,
    epsilon: float = 1e-9,
) -> tuple[Schedule, Journal]:
    """Greedy over candidate slices scored by expected new solves per time.

    Candidates are ``(s, t + 1)`` for every SOL observation ``(SOL, t)`` of
    ``s``. A problem's weight is ``max(1 - P_solved, beta ** k)`` where ``k``
    counts earlier slices with a positive success estimate on it; with
    ``beta = 0`` this is the plain ``1 - P_solved``.
    """
    if budget is None:
        raise ValueError("probabilistic construction requires a finite budget")
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    emitted = params.emitted

    rows: dict[str, list[tuple[str, tuple]]] = {s: [] for s in matrix.strategies}
    cands: dict[str, list[int]] = {s: [] for s in matrix.strategies}
    for (s, p), obs in matrix.cells():
        rows[s].append((p, obs))
        cands[s].extend(o.time + 1 for o in obs if o.status.value == "SOL")
    for s in cands:
        cands[s] = sorted(set(cands[s]))

    # cache of success estimates; keys (s, p, T)
    psol: dict[tuple[str, str, int], float] = {}

    def estimate(s, p, obs, T):
        key = (s, p, T)
        if key not in psol:
            psol[key] = float(estimate_success_probability(obs, T).value)
        return psol[key]

    fail = dict.fromkeys(matrix.problems, 1.0)
    cover = dict.fromkeys(matrix.problems, 0)
    slices: list[Slice] = []
    entries: list[JournalEntry] = []
    used = 0
    while True:
        best_crit, best_key = 0.0, None
        for s in matrix.strategies:
            for T in cands[s]:
                if used + emitted(T) > budget:
                    break
                reward = 0.0
                for p, obs in rows[s]:
                    pr = estimate(s, p, obs, T)
                    if pr > 0:
                        reward += pr * max(fail[p], params.weight(cover[p]))
                if reward <= 0:
                    continue
                crit = criterion(reward, T, params.alpha)
                key = (T, s, T)
                if _beats(crit, key, best_crit, best_key):
                    best_crit, best_key = crit, key
        if best_key is None or best_crit < epsilon:
            break
        T, s, _ = best_key
        newly = []
        for p, obs in rows[s]:
            pr = estimate(s, p, obs, T)
            if pr > 0:
                if cover[p] == 0:
                    newly.append(p)
                cover[p] += 1
                fail[p] *= 1 - pr
        slices.append(Slice(s, emitted(T)))
        used += emitted(T)
        entries.append(JournalEntry(s, T, T, used, tuple(sorted(newly)), best_crit))
    journal = Journal(tuple(entries), ExtensionMode.NONE, params.slack_mul, params.slack_add)
    return Schedule(tuple(slices)), journal


def order_slices(schedule: AnySchedule, matrix: EvaluationMatrix) -> Schedule:
    """Order slices by additional coverage per unit of limit, best first."""
    if isinstance(schedule, PreSchedule):
        schedule = schedule.as_schedule()
    pending = list(schedule.slices)
    covered: set[str] = set()
    out: list[Slice] = []
    while pending:
        best_i, best_key = 0, None
        for i, sl in enumerate(pending):
            gain = sum(1 for p, d in matrix.solved_by(sl.strategy).items() if d <= sl.limit and p not in covered)
            key = (-Fraction(gain, sl.limit), sl.strategy, sl.limit)
            if best_key is None or key < best_key:
                best_i, best_key = i, key
        sl = pending.pop(best_i)
        covered.update(p for p, d in matrix.solved_by(sl.strategy).items() if d <= sl.limit)
        out.append(sl)
    return Schedule(tuple(out))


def pad_slices(schedule: AnySchedule, pad: int) -> Schedule:
    if pad < 0:
        raise ValueError(f"pad must be nonnegative, got {pad}")
    if isinstance(schedule, PreSchedule):
        schedule = schedule.as_schedule()
    return Schedule(tuple(Slice(sl.strategy, sl.limit + pad) for sl in schedule.slices))


def journal_coverage(journal: Journal) -> int:
    return sum(len(e.newly_covered) for e in journal.entries)
