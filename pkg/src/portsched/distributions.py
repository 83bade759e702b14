"""Strategy-sampling distributions derived from evaluation data.

The utility of an option value is the number of problems uniquely solved by
the strategies carrying it, divided by how many such strategies there are.
Strategies where the option does not apply (absent from ``options``) form
the N/A bucket and do not take part in the normalization.
"""

from __future__ import annotations

import csv
import io
import json
import random
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .model import EvaluationMatrix, ParseError

NA = None  # bucket key for strategies where an option does not apply
UNCONDITIONAL = "Unconditional"


class EmptyAnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyMeta:
    id: str
    options: Mapping[str, str] = field(default_factory=dict)
    witness: str | None = None
    discovered_at: float | None = None
    probe_limit: int | None = None

    def __post_init__(self):
        if any(not name for name in self.options):
            raise ValueError(f"strategy {self.id!r}: option names must be nonempty")


def load_meta(data: Mapping) -> list[StrategyMeta]:
    try:
        return [
            StrategyMeta(
                sid,
                {str(k): str(v) for k, v in entry.get("options", {}).items()},
                entry.get("witness"),
                entry.get("discovered_at"),
                entry.get("probe_limit"),
            )
            for sid, entry in data["strategies"].items()
        ]
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise ParseError(f"bad strategy metadata: {exc}") from exc


def read_meta_file(path) -> list[StrategyMeta]:
    with open(path, encoding="utf-8") as fh:
        try:
            return load_meta(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), exc.lineno) from exc


def meta_to_json(metas: Iterable[StrategyMeta]) -> dict:
    out = {}
    for m in metas:
        entry: dict = {"options": dict(m.options)}
        if m.witness is not None:
            entry["witness"] = m.witness
        if m.discovered_at is not None:
            entry["discovered_at"] = m.discovered_at
        if m.probe_limit is not None:
            entry["probe_limit"] = m.probe_limit
        out[m.id] = entry
    return {"strategies": out}


def uniquely_solved(matrix: EvaluationMatrix, subset: Iterable[str]) -> set[str]:
    """Problems solved inside ``subset`` and by no strategy outside it."""
    subset = set(subset)
    unknown = subset - set(matrix.strategies)
    if unknown:
        raise KeyError(f"unknown strategies {sorted(unknown)}")
    inside: set[str] = set()
    outside: set[str] = set()
    for s in matrix.strategies:
        (inside if s in subset else outside).update(matrix.solved_by(s))
    return inside - outside


@dataclass
class OptionDistributionRow:
    value: str | None  # None is N/A
    strategy_count: int
    unique_solved: int
    per_strategy: float
    normalized: float | None = None
    uniform_fallback: bool = False

    @property
    def label(self) -> str:
        return "N/A" if self.value is None else self.value


def option_value_distribution(
    matrix: EvaluationMatrix, meta: Iterable[StrategyMeta], option: str
) -> list[OptionDistributionRow]:
    """Rows sorted by value, N/A last. Strategies absent from ``matrix`` are ignored."""
    by_id = {m.id: m for m in meta}
    missing = [s for s in matrix.strategies if s not in by_id]
    if missing:
        raise KeyError(f"no metadata for strategies {missing[:5]}")
    buckets: dict[str | None, list[str]] = {}
    for s in matrix.strategies:
        buckets.setdefault(by_id[s].options.get(option, NA), []).append(s)
    if not any(v is not NA for v in buckets):
        raise EmptyAnalysisError(f"option {option!r} is not set in any strategy")

    rows = []
    for value in sorted((v for v in buckets if v is not NA)) + ([NA] if NA in buckets else []):
        members = buckets[value]
        unique = len(uniquely_solved(matrix, members))
        rows.append(OptionDistributionRow(value, len(members), unique, unique / len(members)))
    real = [r for r in rows if r.value is not NA]
    mass = sum(r.per_strategy for r in real)
    if mass > 0:
        for r in real:
            r.normalized = r.per_strategy / mass
    else:
        warnings.warn(f"option {option!r}: no value has positive utility; using a uniform distribution")
        for r in real:
            r.normalized = 1 / len(real)
            r.uniform_fallback = True
    return rows


def conditional_distribution(
    matrix: EvaluationMatrix, meta: Iterable[StrategyMeta], option: str, given: str
) -> dict[str, list[OptionDistributionRow]]:
    """Distribution of ``option`` within each value group of ``given``.

    Uniqueness is judged inside each group. The ``"Unconditional"`` entry is
    computed over the union of the groups. Groups where ``option`` never
    applies are omitted.
    """
    meta = list(meta)
    by_id = {m.id: m for m in meta}
    groups: dict[str, list[str]] = {}
    for s in matrix.strategies:
        if s not in by_id:
            raise KeyError(f"no metadata for strategy {s!r}")
        value = by_id[s].options.get(given)
        if value is not None:
            groups.setdefault(value, []).append(s)
    out: dict[str, list[OptionDistributionRow]] = {}
    for value in sorted(groups):
        try:
            out[value] = option_value_distribution(matrix.restrict(groups[value]), meta, option)
        except EmptyAnalysisError:
            continue
    union = [s for members in groups.values() for s in members]
    if not union:
        raise EmptyAnalysisError(f"option {given!r} is not set in any strategy")
    out[UNCONDITIONAL] = option_value_distribution(matrix.restrict(union), meta, option)
    return out


def distribution_csv(rows: list[OptionDistributionRow], given: str | None = None) -> str:
    """Report with 2-decimal rounding; ``given`` adds a leading group column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    head = ["value", "strategies", "unique_absolute", "unique_per_strategy", "distribution"]
    writer.writerow((["given"] if given is not None else []) + head)
    for r in rows:
        line = [
            r.label,
            r.strategy_count,
            r.unique_solved,
            f"{r.per_strategy:.2f}",
            "" if r.normalized is None else f"{r.normalized:.2f}",
        ]
        writer.writerow(([given] if given is not None else []) + line)
    return buf.getvalue()


def conditional_csv(table: Mapping[str, list[OptionDistributionRow]]) -> str:
    parts = []
    for i, (group, rows) in enumerate(table.items()):
        text = distribution_csv(rows, given=group)
        parts.append(text if i == 0 else text.split("\n", 1)[1])
    return "".join(parts) if parts else "given,value,strategies,unique_absolute,unique_per_strategy,distribution\n"


def update_sampling_frequencies(contributing: Iterable[StrategyMeta], option: str) -> dict[str, tuple[int, float]]:
    """Value counts of ``option`` among contributing strategies, with frequencies."""
    counts = Counter(m.options[option] for m in contributing if option in m.options)
    total = sum(counts.values())
    return {v: (c, c / total) for v, c in sorted(counts.items())}


# -- probe limits ----------------------------------------------------------


def luby(i: int) -> int:
    """i-th element (1-based) of the Luby sequence 1, 1, 2, 1, 1, 2, 4, ..."""
    if i < 1:
        raise ValueError("Luby index starts at 1")
    while True:
        k = i.bit_length()
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


@dataclass(frozen=True)
class LubyConfig:
    base: int
    cap: int

    def __post_init__(self):
        if self.base < 1 or self.cap < 1:
            raise ValueError("base and cap must be positive")
        ratio, rem = divmod(self.cap, self.base)
        if rem or ratio & (ratio - 1):
            raise ValueError(f"cap {self.cap} must be base {self.base} times a power of two")


def luby_limits(config: LubyConfig) -> Iterator[int]:
    """Endless ``base * luby(i)``, restarting at index 1 right after the cap is emitted."""
    i = 1
    while True:
        value = config.base * luby(i)
        yield value
        i = 1 if value == config.cap else i + 1


# -- problem sampling ------------------------------------------------------


def sample_uncovered_problem(
    problems: Iterable[str],
    meta: Iterable[StrategyMeta],
    matrix: EvaluationMatrix,
    seed=None,
    forgotten: Iterable[str] | None = None,
) -> tuple[frozenset[str], frozenset[str], str | None]:
    """Forget a random half of ``problems`` and pick an uncovered problem in the rest.

    Only strategies whose witness lies in the remaining half count as
    discovered. ``forgotten`` overrides the random half.
    """
    pool = sorted(set(problems))
    if not pool:
        raise ValueError("problem set is empty")
    rng = random.Random(seed)
    if forgotten is None:
        forgotten = rng.sample(pool, len(pool) // 2)
    forgotten = frozenset(forgotten)
    remaining = frozenset(pool) - forgotten
    known = set(matrix.strategies)
    covered: set[str] = set()
    for m in meta:
        if m.witness in remaining and m.id in known:
            covered.update(matrix.solved_by(m.id))
    open_problems = sorted(remaining - covered)
    pick = rng.choice(open_problems) if open_problems else None
    return forgotten, remaining, pick
