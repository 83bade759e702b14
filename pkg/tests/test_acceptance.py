"""Exit criteria. Each test records one PASS/FAIL line, shown in the terminal summary."""

import contextlib
import itertools
import json
import random
import statistics
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES, OBS1, TOY1_CSV, random_instances, toy1, toy2
from datasets import AVATAR, SATURATION, option_dataset
from oracles import brute_force_optimum
from portsched.baselines import PSetheoParams, bucket_schedule, psetheo, schedule_curve, vbss_curve, curve_value
from portsched.distributions import LubyConfig, luby_limits, option_value_distribution
from portsched.exact import build_mip, export_lp, min_time_full_cover, solve_exact
from portsched.greedy import (
    ExtensionMode,
    Journal,
    RegularizationParams,
    construct_greedy,
    construct_probabilistic,
    criterion,
    order_slices,
)
from portsched.harness import ConstructorConfig, cross_validate, rescale
from portsched.model import (
    EvaluationMatrix,
    Observation,
    PreSchedule,
    Status,
    dump_matrix,
    estimate_success_probability,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    schedule_from_json,
    schedule_to_json,
    simulate_schedule,
)
from portsched.synthetic import random_matrix, random_meta


@contextlib.contextmanager
def criterion_check(number, title, max_seconds=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if max_seconds is not None:
            assert elapsed < max_seconds, f"took {elapsed:.2f}s, limit {max_seconds}s"
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"[FAIL] {number:>2}. {title}: {exc}")
        raise
    ACCEPTANCE_LINES.append(f"[PASS] {number:>2}. {title} ({elapsed:.2f}s)")


def test_01_success_probability_table():
    with criterion_check(1, "success-probability worked table", 1.0):
        expected = [(0, 6), (0, 6), (0, 5), (1, 5), (1, 4), (2, 4), (3, 4), (3, 4)]
        got = []
        for limit in range(8):
            est = estimate_success_probability(OBS1, limit)
            got.append((est.successes, est.informative))
            assert est.value == Fraction(*expected[limit])
        assert got == expected


def test_02_distribution_tables():
    with criterion_check(2, "AVATAR and saturation-algorithm distributions", 1.0):
        m, meta = option_dataset("av", AVATAR)
        rows = {r.label: r for r in option_value_distribution(m, meta, "av")}
        per = {k: round(rows[k].per_strategy, 2) for k in ("off", "on", "N/A")}
        assert per == pytest.approx({"off": 0.07, "on": 0.20, "N/A": 0.04}, abs=0.005)
        norm = {k: round(rows[k].normalized, 2) for k in ("off", "on")}
        assert norm == pytest.approx({"off": 0.25, "on": 0.75}, abs=0.005)

        m, meta = option_dataset("sa", SATURATION)
        rows = {r.label: r for r in option_value_distribution(m, meta, "sa")}
        norm = {k: round(rows[k].normalized, 2) for k in SATURATION}
        assert norm == pytest.approx(
            {"Otter": 0.32, "LRS": 0.27, "Discount": 0.23, "FMB": 0.17, "InstGen": 0.00}, abs=0.005
        )


def test_03_luby():
    with criterion_check(3, "Luby probe limits", 1.0):
        seq = list(itertools.islice(luby_limits(LubyConfig(2000, 256000)), 300))
        assert seq[:7] == [2000, 2000, 4000, 2000, 2000, 4000, 8000]
        assert seq.index(256000) + 1 == 255


def test_04_regularization_identities():
    with criterion_check(4, "neutral regularization settings reproduce the base run", 10.0):
        rng = random.Random(404)
        neutral = [
            RegularizationParams(alpha=1),
            RegularizationParams(beta=0),
            RegularizationParams(slack_mul=1, slack_add=0),
            RegularizationParams(slack_mul=1.0, slack_add=0, alpha=1.0, beta=0.0),
        ]
        for _ in range(100):
            m = random_matrix(rng, rng.randint(1, 8), rng.randint(1, 15), max_time=32, density=rng.uniform(0.1, 0.7))
            budget = rng.choice([None, rng.randint(0, 120)])
            for mode in ExtensionMode:
                base = construct_greedy(m, budget, mode=mode)
                for params in neutral:
                    assert construct_greedy(m, budget, params, mode) == base


def test_05_alpha_preference():
    with criterion_check(5, "alpha=1.5 prefers 2 problems/5000 Mi over 1 problem/2000 Mi; alpha=1 the reverse"):
        assert criterion(2, 5000, 1.5) > criterion(1, 2000, 1.5)
        assert criterion(2, 5000, 1.0) < criterion(1, 2000, 1.0)
        m = EvaluationMatrix(cells={
            ("A", "p1"): [Observation(Status.SOL, 5000)],
            ("A", "p2"): [Observation(Status.SOL, 5000)],
            ("B", "p3"): [Observation(Status.SOL, 2000)],
        })
        first = lambda alpha: construct_greedy(m, None, RegularizationParams(alpha=alpha)).__getitem__(1).entries[0]
        assert (first(1.5).strategy, first(1.5).new_limit) == ("A", 5000)
        assert (first(1.0).strategy, first(1.0).new_limit) == ("B", 2000)


def _acceptance_instances():
    rng = random.Random(606)
    out = []
    for m in random_instances(200, seed=606, max_strategies=5, max_problems=8, max_time=32):
        out.append((m, rng.randint(0, 80)))
    return out


def test_06_oracle_optimality(capsys):
    with criterion_check(6, "exact search equals enumeration; greedy never above optimum", 60.0):
        ratios = []
        for m, budget in _acceptance_instances():
            _, opt = solve_exact(m, budget)
            assert opt == brute_force_optimum(m, budget)
            greedy = len(simulate_schedule(construct_greedy(m, budget)[0], m))
            assert greedy <= opt
            if opt:
                ratios.append(greedy / opt)
        mean = statistics.fmean(ratios)
    ACCEPTANCE_LINES.append(f"       mean greedy/optimal coverage ratio over {len(ratios)} instances: {mean:.4f}")


def test_07_journal_prefix_equivalence():
    with criterion_check(7, "budgeted run equals the unbounded journal prefix while the choice fits", 30.0):
        rng = random.Random(707)
        for m, _ in _acceptance_instances():
            _, unbounded = construct_greedy(m, None)
            for budget in [rng.randint(0, 100) for _ in range(5)]:
                _, budgeted = construct_greedy(m, budget)
                fits = 0
                while fits < len(unbounded) and unbounded.entries[fits].cumulative <= budget:
                    fits += 1
                assert budgeted.entries[:fits] == unbounded.entries[:fits]


def test_08_toy_fixtures():
    with criterion_check(8, "TOY fixtures"):
        t1, t2 = toy1(), toy2()
        sched, _ = construct_greedy(t1, 10)
        assert sched == PreSchedule({"A": 5, "B": 3}) and len(simulate_schedule(sched, t1)) == 3
        assert solve_exact(t1, 8)[1] == 3
        assert len(simulate_schedule(construct_greedy(t2, 6)[0], t2)) == 1
        assert solve_exact(t2, 6)[1] == 3
        assert min_time_full_cover(t1)[1] == 8
        assert vbss_curve(t1) == [(2, 1), (3, 2), (5, 3)]
        assert len(simulate_schedule(psetheo(t1, PSetheoParams(dt=1, l=8, budget=8)), t1)) == 3


def test_09_curves():
    with criterion_check(9, "curves monotone; VBSS dominates schedule curves", 10.0):
        rng = random.Random(909)
        for _ in range(50):
            m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 12), max_time=32, timeout=32)
            budget = rng.randint(1, 100)
            vbss = vbss_curve(m)
            curves = [
                schedule_curve(construct_greedy(m, None)[1], m),
                schedule_curve(order_slices(construct_greedy(m, budget)[0], m), m),
                schedule_curve(construct_greedy(m, budget, RegularizationParams(1.3, 2, 1.5, 0.4), "none")[0], m),
                schedule_curve(construct_probabilistic(m, budget)[0], m),
                schedule_curve(order_slices(solve_exact(m, budget)[0], m), m),
                schedule_curve(order_slices(psetheo(m, PSetheoParams(1, 10, budget)), m), m),
                schedule_curve(bucket_schedule(m, rng.randint(1, 16), budget), m),
            ]
            for curve in curves + [vbss]:
                times = [pt.time for pt in curve]
                solved = [pt.solved for pt in curve]
                assert times == sorted(set(times))
                assert solved == sorted(solved)
            for curve in curves:
                for pt in curve:
                    assert curve_value(vbss, pt.time) >= pt.solved
                for pt in vbss:
                    assert pt.solved >= curve_value(curve, pt.time)


def test_10_cv_hygiene():
    with criterion_check(10, "witness hygiene over 100 folds; exact rescaling"):
        rng = random.Random(1010)
        folds = 0
        while folds < 100:
            m = random_matrix(rng, rng.randint(3, 8), rng.randint(10, 20), max_time=32)
            meta = random_meta(rng, m)
            witness = {x.id: x.witness for x in meta}
            summary = cross_validate(m, meta, 5, 1, rng.randint(0, 10**6), ConstructorConfig(alpha=rng.uniform(0.5, 2)), 40)
            splits = {(f.round, f.fold) for f in summary.folds}
            from portsched.harness import kfold_splits

            for split in kfold_splits(m.problems, 5, 1, summary.seed):
                if (split.round, split.fold) not in splits:
                    continue
                fold = next(f for f in summary.folds if (f.round, f.fold) == (split.round, split.fold))
                assert all(witness[sl.strategy] not in split.test for sl in fold.schedule)
                total = len(m.problems)
                assert fold.train_rescaled == fold.train_solved * total / len(split.train)
                assert fold.test_rescaled == fold.test_solved * total / len(split.test)
                folds += 1
        assert rescale(12, 20, 100) == 60.0


def test_11_round_trips():
    with criterion_check(11, "matrix/schedule/journal round-trips; LP lines for TOY1"):
        m = load_matrix(TOY1_CSV + "A,p1,TMO,1\nB,p2,GUP,4\nB,p2,GUP,4\n")
        again = load_matrix(dump_matrix(m))
        assert again == m and dump_matrix(again) == dump_matrix(m)
        assert matrix_from_json(json.loads(json.dumps(matrix_to_json(m)))) == m
        sched, journal = construct_greedy(toy1(), None, mode="none")
        assert schedule_from_json(json.loads(json.dumps(schedule_to_json(sched)))) == sched
        assert Journal.from_json(json.loads(json.dumps(journal.to_json()))) == journal
        lines = export_lp(build_mip(toy1(), 8)).splitlines()
        for line in ("t_A + t_B <= 8", "r_A__p1 + r_A__p2 + r_B__p3",
                     "2 r_A__p1 - t_A <= 0", "5 r_A__p2 - t_A <= 0", "3 r_B__p3 - t_B <= 0"):
            assert line in lines


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
