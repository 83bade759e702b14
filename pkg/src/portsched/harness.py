"""Train/test evaluation of schedule constructors.

Every schedule is built from the training problems and the strategies whose
witness problem is a training problem, then simulated on both halves.
Solved counts are rescaled to the size of the whole problem set.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .baselines import PSetheoParams, bucket_schedule, psetheo
from .distributions import StrategyMeta
from .exact import ExactLimits, solve_exact
from .greedy import ExtensionMode, RegularizationParams, construct_greedy, construct_probabilistic, order_slices
from .model import EvaluationMatrix, PreSchedule, Schedule, schedule_to_json, simulate_schedule

CONSTRUCTORS = ("greedy", "probabilistic", "exact", "psetheo", "buckets")


class FoldError(RuntimeError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train: frozenset[str]
    test: frozenset[str]
    round: int = 0
    fold: int = 0

    def __post_init__(self):
        object.__setattr__(self, "train", frozenset(self.train))
        object.__setattr__(self, "test", frozenset(self.test))
        if self.train & self.test:
            raise ValueError("train and test sets overlap")


@dataclass(frozen=True)
class ConstructorConfig:
    """Which constructor to run and its knobs; irrelevant fields are ignored."""

    name: str = "greedy"
    alpha: float = 1.0
    beta: float = 0.0
    slack_mul: float = 1.0
    slack_add: int = 0
    extension: str = "full"
    epsilon: float = 1e-9
    dt: int = 1
    l: int = 100  # noqa: E741
    bucket: int = 1000

    def __post_init__(self):
        if self.name not in CONSTRUCTORS:
            raise ValueError(f"unknown constructor {self.name!r}; choose from {CONSTRUCTORS}")
        ExtensionMode(self.extension)
        self.regularization  # validates

    @property
    def regularization(self) -> RegularizationParams:
        return RegularizationParams(self.slack_mul, self.slack_add, self.alpha, self.beta)

    def build(self, matrix: EvaluationMatrix, budget: int) -> Schedule:
        if self.name == "greedy":
            sched, _ = construct_greedy(matrix, budget, self.regularization, self.extension)
        elif self.name == "probabilistic":
            sched, _ = construct_probabilistic(matrix, budget, self.regularization, self.epsilon)
        elif self.name == "exact":
            sched, _ = solve_exact(matrix, budget, ExactLimits())
        elif self.name == "psetheo":
            sched = psetheo(matrix, PSetheoParams(self.dt, self.l, budget))
        else:
            sched = bucket_schedule(matrix, self.bucket, budget)
        if isinstance(sched, PreSchedule):
            sched = order_slices(sched, matrix)
        return sched


@dataclass
class FoldResult:
    train_solved: int
    test_solved: int
    train_rescaled: float
    test_rescaled: float | None
    schedule: Schedule
    fit_seconds: float = 0.0
    round: int = 0
    fold: int = 0
    strategies_available: int = 0

    def to_json(self) -> dict:
        out = asdict(self)
        out["schedule"] = schedule_to_json(self.schedule)
        return out


@dataclass
class CvSummary:
    config: ConstructorConfig
    k: int
    rounds: int
    seed: object
    budget: int
    folds: list[FoldResult] = field(default_factory=list)
    skipped: int = 0
    errors: list[str] = field(default_factory=list)

    def _values(self, attr):
        return [getattr(f, attr) for f in self.folds if getattr(f, attr) is not None]

    @staticmethod
    def _mean(xs):
        return statistics.fmean(xs) if xs else None

    @staticmethod
    def _stdev(xs):
        # sample standard deviation
        return statistics.stdev(xs) if len(xs) > 1 else None

    @property
    def train_mean(self):
        return self._mean(self._values("train_rescaled"))

    @property
    def train_std(self):
        return self._stdev(self._values("train_rescaled"))

    @property
    def test_mean(self):
        return self._mean(self._values("test_rescaled"))

    @property
    def test_std(self):
        return self._stdev(self._values("test_rescaled"))

    @property
    def fit_seconds_mean(self):
        return self._mean(self._values("fit_seconds"))

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "k": self.k,
            "rounds": self.rounds,
            "seed": self.seed,
            "budget": self.budget,
            "fold_count": len(self.folds),
            "skipped": self.skipped,
            "errors": self.errors,
            "train_mean": self.train_mean,
            "train_std": self.train_std,
            "test_mean": self.test_mean,
            "test_std": self.test_std,
            "std_kind": "sample",
            "fit_seconds_mean": self.fit_seconds_mean,
            "folds": [f.to_json() for f in self.folds],
        }

    def csv_row(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ("constructor", "alpha", "beta", "slack_mul", "slack_add", "budget", "folds", "skipped",
             "train_mean", "train_std", "test_mean", "test_std", "fit_seconds_mean")
        )
        c = self.config
        writer.writerow(
            (c.name, c.alpha, c.beta, c.slack_mul, c.slack_add, self.budget, len(self.folds), self.skipped,
             self.train_mean, self.train_std, self.test_mean, self.test_std, self.fit_seconds_mean)
        )
        return buf.getvalue()


def kfold_splits(problems: Iterable[str], k: int, rounds: int = 1, seed=None) -> list[SplitSpec]:
    """``rounds`` independent random partitions into ``k`` near-equal folds."""
    pool = sorted(set(problems))
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > len(pool):
        raise ValueError(f"k={k} exceeds the number of problems ({len(pool)})")
    if rounds < 1:
        raise ValueError(f"rounds must be positive, got {rounds}")
    rng = random.Random(seed)
    splits = []
    for r in range(rounds):
        order = pool[:]
        rng.shuffle(order)
        folds = [order[i::k] for i in range(k)]
        for i, test in enumerate(folds):
            splits.append(SplitSpec(frozenset(order) - frozenset(test), frozenset(test), r, i))
    return splits


def training_strategy_set(
    meta: Iterable[StrategyMeta], train: Iterable[str], include_unwitnessed: bool = False
) -> set[str]:
    train = set(train)
    chosen, unwitnessed = set(), []
    for m in meta:
        if m.witness is None:
            unwitnessed.append(m.id)
            if include_unwitnessed:
                chosen.add(m.id)
        elif m.witness in train:
            chosen.add(m.id)
    if unwitnessed:
        action = "included" if include_unwitnessed else "excluded"
        warnings.warn(f"{len(unwitnessed)} strategies have no witness problem and were {action}")
    return chosen


def filter_by_timestamp(meta: Iterable[StrategyMeta], cutoff: float) -> set[str]:
    chosen, missing = set(), 0
    for m in meta:
        if m.discovered_at is None:
            missing += 1
        elif m.discovered_at <= cutoff:
            chosen.add(m.id)
    if missing:
        warnings.warn(f"{missing} strategies have no discovery timestamp and were excluded")
    return chosen


def rescale(solved: int, subset_size: int, total: int) -> float | None:
    if subset_size == 0:
        return None
    return solved * total / subset_size


def evaluate_split(
    matrix: EvaluationMatrix,
    meta: Iterable[StrategyMeta],
    split: SplitSpec,
    config: ConstructorConfig,
    budget: int,
    include_unwitnessed: bool = False,
) -> FoldResult:
    strategies = training_strategy_set(meta, split.train, include_unwitnessed) & set(matrix.strategies)
    if not strategies:
        raise FoldError(f"round {split.round} fold {split.fold}: no training strategies")
    train_matrix = matrix.restrict(strategies, split.train)
    start = time.perf_counter()
    schedule = config.build(train_matrix, budget)
    fit = time.perf_counter() - start
    solved = simulate_schedule(schedule, matrix)
    train_solved = len(solved & split.train)
    test_solved = len(solved & split.test)
    total = len(matrix.problems)
    return FoldResult(
        train_solved,
        test_solved,
        rescale(train_solved, len(split.train), total),
        rescale(test_solved, len(split.test), total),
        schedule,
        fit,
        split.round,
        split.fold,
        len(strategies),
    )


def cross_validate(
    matrix: EvaluationMatrix,
    meta: Iterable[StrategyMeta],
    k: int,
    rounds: int,
    seed,
    config: ConstructorConfig,
    budget: int,
    include_unwitnessed: bool = False,
) -> CvSummary:
    meta = list(meta)
    summary = CvSummary(config, k, rounds, seed, budget)
    with warnings.catch_warnings():
        warnings.simplefilter("once")
        for split in kfold_splits(matrix.problems, k, rounds, seed):
            try:
                summary.folds.append(evaluate_split(matrix, meta, split, config, budget, include_unwitnessed))
            except FoldError as exc:
                summary.skipped += 1
                summary.errors.append(str(exc))
    return summary
