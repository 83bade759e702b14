"""Exact schedule construction.

``build_mip``/``export_lp`` produce the integer program for an external
solver. ``solve_exact`` and ``min_time_full_cover`` solve small instances
directly by branch and bound over each strategy's candidate grid
``{0} U {finite solve times}``: any optimal limit can be lowered to the
largest solve time it covers without losing a problem, so the grid is
sufficient.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass

from .model import EvaluationMatrix, PreSchedule, vbss_times


class CapacityError(RuntimeError):
    pass


class ExportError(ValueError):
    pass


@dataclass(frozen=True)
class ExactLimits:
    max_combinations: int = 10**7
    max_seconds: float | None = None

    def __post_init__(self):
        if self.max_combinations < 1:
            raise ValueError("max_combinations must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")


@dataclass(frozen=True)
class Constraint:
    terms: tuple[tuple[int, tuple], ...]  # (coefficient, variable key)
    sense: str  # "<="
    rhs: int


@dataclass(frozen=True)
class MipModel:
    """Variables are keyed ``("t", s)`` (integer >= 0) and ``("r", s, p)`` (binary)."""

    strategies: tuple[str, ...]
    budget: int
    rewards: tuple[tuple[str, str, int], ...]  # (strategy, problem, solve time)
    constraints: tuple[Constraint, ...]

    @property
    def time_vars(self):
        return [("t", s) for s in self.strategies]

    @property
    def reward_vars(self):
        return [("r", s, p) for s, p, _ in self.rewards]

    @property
    def objective(self):
        return [(1, v) for v in self.reward_vars]

    def as_arrays(self):
        """Dense ``(c, A_ub, b_ub, lower, upper, integrality, variables)`` for a maximization."""
        import numpy as np

        variables = self.time_vars + self.reward_vars
        index = {v: i for i, v in enumerate(variables)}
        c = np.zeros(len(variables))
        for coef, v in self.objective:
            c[index[v]] = coef
        A = np.zeros((len(self.constraints), len(variables)))
        b = np.zeros(len(self.constraints))
        for row, con in enumerate(self.constraints):
            for coef, v in con.terms:
                A[row, index[v]] += coef
            b[row] = con.rhs
        lower = np.zeros(len(variables))
        upper = np.array([np.inf] * len(self.time_vars) + [1.0] * len(self.reward_vars))
        integrality = np.ones(len(variables))
        return c, A, b, lower, upper, integrality, variables


def build_mip(matrix: EvaluationMatrix, budget: int) -> MipModel:
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    rewards = []
    for s in matrix.strategies:
        for p, d in sorted(matrix.solved_by(s).items()):
            rewards.append((s, p, d))
    cons = []
    if matrix.strategies:
        cons.append(Constraint(tuple((1, ("t", s)) for s in matrix.strategies), "<=", budget))
    for s, p, d in rewards:
        cons.append(Constraint(((d, ("r", s, p)), (-1, ("t", s))), "<=", 0))
    per_problem: dict[str, list] = {}
    for s, p, _ in rewards:
        per_problem.setdefault(p, []).append((1, ("r", s, p)))
    for p in sorted(per_problem):
        cons.append(Constraint(tuple(per_problem[p]), "<=", 1))
    return MipModel(tuple(matrix.strategies), budget, tuple(rewards), tuple(cons))


def _sanitize(ident: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", ident)


def _var_names(model: MipModel) -> dict[tuple, str]:
    names = {}
    for v in model.time_vars:
        names[v] = f"t_{_sanitize(v[1])}"
    for v in model.reward_vars:
        names[v] = f"r_{_sanitize(v[1])}__{_sanitize(v[2])}"
    seen: dict[str, tuple] = {}
    for v, name in names.items():
        if name in seen:
            raise ExportError(f"variable name collision after sanitizing: {seen[name]} and {v} -> {name}")
        seen[name] = v
    return names


def _expr(terms, names) -> str:
    out = []
    for coef, v in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = names[v] if mag == 1 else f"{mag} {names[v]}"
        if not out:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    return " ".join(out)


def export_lp(model: MipModel) -> str:
    """CPLEX LP text for ``model``."""
    names = _var_names(model)
    lines = ["\\ schedule construction: maximize covered problems within the budget", "Maximize"]
    lines.append(_expr(model.objective, names) if model.objective else "obj: 0")
    lines.append("Subject To")
    for con in model.constraints:
        lines.append(f"{_expr(con.terms, names)} {con.sense} {con.rhs}")
    if model.time_vars:
        lines.append("Bounds")
        lines.extend(f"0 <= {names[v]}" for v in model.time_vars)
        lines.append("Generals")
        lines.extend(names[v] for v in model.time_vars)
    if model.reward_vars:
        lines.append("Binaries")
        lines.extend(names[v] for v in model.reward_vars)
    lines.append("End")
    return "\n".join(lines) + "\n"


class _Clock:
    def __init__(self, limits: ExactLimits):
        self.deadline = None if limits.max_seconds is None else time.monotonic() + limits.max_seconds
        self.ticks = 0

    def check(self):
        self.ticks += 1
        if self.deadline is not None and self.ticks % 1024 == 0 and time.monotonic() > self.deadline:
            raise CapacityError("exact search exceeded its time limit; export the LP model instead")


def _grids(matrix: EvaluationMatrix, cap: float, limits: ExactLimits) -> list[list[int]]:
    grids = [[0] + [t for t in matrix.candidate_times(s) if t <= cap] for s in matrix.strategies]
    size = math.prod(len(g) for g in grids)
    if size > limits.max_combinations:
        raise CapacityError(
            f"candidate grid has {size} combinations (limit {limits.max_combinations}); "
            "export the LP model and use an external MIP solver"
        )
    return grids


def solve_exact(
    matrix: EvaluationMatrix, budget: int, limits: ExactLimits = ExactLimits()
) -> tuple[PreSchedule, int]:
    """Maximum coverage under ``budget``.

    Among optimal pre-schedules the lexicographically smallest limit vector
    (strategies in id order) is returned.
    """
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    strategies = matrix.strategies
    grids = _grids(matrix, budget, limits)
    solved = [matrix.solved_by(s) for s in strategies]
    n = len(strategies)
    reachable = {p for p, t in vbss_times(matrix).items() if t <= budget}
    ceiling = len(reachable)
    clock = _Clock(limits)

    counts = dict.fromkeys(matrix.problems, 0)
    chosen = [0] * n
    best = {"cov": -1, "limits": [0] * n}
    covered = 0

    def bound(i, remaining):
        extra = 0
        for p in reachable:
            if counts[p] == 0 and any(solved[j].get(p, math.inf) <= remaining for j in range(i, n)):
                extra += 1
        return covered + extra

    def dfs(i, remaining):
        nonlocal covered
        clock.check()
        if i == n:
            if covered > best["cov"]:
                best["cov"], best["limits"] = covered, list(chosen)
            return
        if bound(i, remaining) <= best["cov"]:
            return
        for t in grids[i]:
            if t > remaining:
                break
            gained = [p for p, d in solved[i].items() if d <= t]
            for p in gained:
                if counts[p] == 0:
                    covered += 1
                counts[p] += 1
            chosen[i] = t
            dfs(i + 1, remaining - t)
            for p in gained:
                counts[p] -= 1
                if counts[p] == 0:
                    covered -= 1
            chosen[i] = 0
            if best["cov"] == ceiling:
                return

    dfs(0, budget)
    return PreSchedule(dict(zip(strategies, best["limits"]))), max(best["cov"], 0)


def min_time_full_cover(
    matrix: EvaluationMatrix, limits: ExactLimits = ExactLimits()
) -> tuple[PreSchedule, int]:
    """Shortest pre-schedule that covers every problem some strategy solves."""
    strategies = matrix.strategies
    grids = _grids(matrix, math.inf, limits)
    solved = [matrix.solved_by(s) for s in strategies]
    n = len(strategies)
    targets = sorted(p for p, t in vbss_times(matrix).items() if t < math.inf)
    # cheapest remaining way to reach p from strategy i onward
    suffix_min = [[math.inf] * len(targets) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for k, p in enumerate(targets):
            suffix_min[i][k] = min(suffix_min[i + 1][k], solved[i].get(p, math.inf))
    clock = _Clock(limits)

    counts = dict.fromkeys(targets, 0)
    chosen = [0] * n
    best = {"total": math.inf, "limits": None}

    def dfs(i, total):
        clock.check()
        need = 0
        for k, p in enumerate(targets):
            if counts[p] == 0:
                need = max(need, suffix_min[i][k])
        if total + need >= best["total"]:
            return
        if i == n:
            best["total"], best["limits"] = total, list(chosen)
            return
        for t in grids[i]:
            if total + t >= best["total"]:
                break
            gained = [p for p, d in solved[i].items() if d <= t and p in counts]
            for p in gained:
                counts[p] += 1
            chosen[i] = t
            dfs(i + 1, total + t)
            for p in gained:
                counts[p] -= 1
            chosen[i] = 0

    dfs(0, 0)
    return PreSchedule(dict(zip(strategies, best["limits"] or [0] * n))), int(best["total"]) if best["limits"] else 0
