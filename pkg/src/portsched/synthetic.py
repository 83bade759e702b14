"""Random evaluation data for tests and experiment scripts."""

from __future__ import annotations

import random

from .distributions import StrategyMeta
from .model import EvaluationMatrix, Observation, Status


def random_matrix(
    rng: random.Random,
    n_strategies: int,
    n_problems: int,
    max_time: int = 32,
    density: float = 0.4,
    timeout: int | None = None,
) -> EvaluationMatrix:
    """One observation per solved cell; with ``timeout`` unsolved cells get a TMO row."""
    strategies = [f"s{i}" for i in range(n_strategies)]
    problems = [f"p{j}" for j in range(n_problems)]
    cells = {}
    for s in strategies:
        for p in problems:
            if rng.random() < density:
                cells[(s, p)] = [Observation(Status.SOL, rng.randint(1, max_time))]
            elif timeout is not None:
                cells[(s, p)] = [Observation(Status.TMO, timeout)]
    return EvaluationMatrix(strategies, problems, cells)


def random_noisy_matrix(
    rng: random.Random, n_strategies: int, n_problems: int, runs: int = 3, max_time: int = 32
) -> EvaluationMatrix:
    """Several runs per cell with jittered times and all three statuses."""
    cells = {}
    for i in range(n_strategies):
        for j in range(n_problems):
            hardness = rng.random()
            obs = []
            for _ in range(runs):
                x = rng.random()
                if x < 0.1:
                    obs.append(Observation(Status.GUP, rng.randint(0, max_time)))
                elif x < 0.6 * (1 - hardness) + 0.1:
                    obs.append(Observation(Status.SOL, rng.randint(1, max_time)))
                else:
                    obs.append(Observation(Status.TMO, max_time))
            cells[(f"s{i}", f"p{j}")] = obs
    return EvaluationMatrix([f"s{i}" for i in range(n_strategies)], [f"p{j}" for j in range(n_problems)], cells)


def random_meta(rng: random.Random, matrix: EvaluationMatrix, witness_rate: float = 1.0) -> list[StrategyMeta]:
    """Witness each strategy with one of the problems it solves when possible."""
    metas = []
    for s in matrix.strategies:
        solved = sorted(matrix.solved_by(s))
        witness = None
        if rng.random() < witness_rate:
            witness = rng.choice(solved) if solved else rng.choice(matrix.problems)
        metas.append(
            StrategyMeta(
                s,
                {"av": rng.choice(["on", "off"]), "sa": rng.choice(["otter", "lrs", "discount"])},
                witness,
                round(rng.uniform(0, 20), 3),
                2000,
            )
        )
    return metas
