import json
import random

import pytest

from conftest import OBS1, random_instances, toy1
from oracles import literal_greedy
from portsched.greedy import (
    ExtensionMode,
    Journal,
    RegularizationParams,
    construct_greedy,
    construct_probabilistic,
    journal_coverage,
    order_slices,
    pad_slices,
    replay_journal,
)
from portsched.model import (
    EvaluationMatrix,
    Observation,
    PreSchedule,
    Schedule,
    Slice,
    Status,
    load_matrix,
    simulate_schedule,
)
from portsched.synthetic import random_matrix


def det(rows):
    """Matrix from (strategy, problem, time) SOL rows."""
    return EvaluationMatrix(cells={(s, p): [Observation(Status.SOL, t)] for s, p, t in rows})


def trace(journal):
    return [(e.strategy, e.new_limit, e.delta, e.cumulative, set(e.newly_covered)) for e in journal]


class TestBaseGreedy:
    def test_toy1_budget_10(self, m_toy1):
        sched, journal = construct_greedy(m_toy1, 10)
        assert sched == PreSchedule({"A": 5, "B": 3})
        assert sched.total == 8
        assert trace(journal) == [("A", 2, 2, 2, {"p1"}), ("A", 5, 3, 5, {"p2"}), ("B", 3, 3, 8, {"p3"})]
        assert [e.criterion for e in journal] == pytest.approx([1 / 2, 1 / 3, 1 / 3])

    def test_toy1_budget_4(self, m_toy1):
        sched, journal = construct_greedy(m_toy1, 4)
        assert sched == PreSchedule({"A": 2})
        assert simulate_schedule(sched, m_toy1) == {"p1"}

    def test_toy2_tie_prefers_shorter(self, m_toy2):
        sched, _ = construct_greedy(m_toy2, 6)
        assert sched == PreSchedule({"A": 2})
        assert len(simulate_schedule(sched, m_toy2)) == 1

    def test_negative_budget(self, m_toy1):
        with pytest.raises(ValueError):
            construct_greedy(m_toy1, -1)

    def test_zero_budget(self, m_toy1):
        sched, journal = construct_greedy(m_toy1, 0)
        assert sched == PreSchedule({}) and len(journal) == 0

    def test_empty_matrix(self):
        sched, journal = construct_greedy(EvaluationMatrix(), None)
        assert sched.total == 0 and len(journal) == 0

    @pytest.mark.parametrize("budget", [None, 0, 3, 7, 15, 40])
    def test_matches_literal_algorithm(self, budget):
        for m in random_instances(40, seed=budget or 99, max_strategies=4, max_problems=6, max_time=12):
            _, journal = construct_greedy(m, budget)
            assert [(e.strategy, e.new_limit) for e in journal] == literal_greedy(m, budget)


class TestRegularization:
    def test_alpha_prefers_longer_slice(self, m_toy1):
        _, journal = construct_greedy(m_toy1, 10, RegularizationParams(alpha=1.5))
        first = journal.entries[0]
        assert (first.strategy, first.new_limit) == ("A", 5)
        assert first.criterion == pytest.approx(2**1.5 / 5)

    def test_slack_budget_tracks_inflated_total(self, m_toy1):
        params = RegularizationParams(slack_mul=1.5)
        sched, journal = construct_greedy(m_toy1, 10, params)
        # A@2 -> 3, A@5 -> round(7.5) = 8, B@3 -> round(4.5) = 5 would overshoot
        assert sched == PreSchedule({"A": 8})
        assert [e.cumulative for e in journal] == [3, 8]
        assert [e.new_limit for e in journal] == [2, 5]

    def test_additive_slack(self, m_toy1):
        sched, journal = construct_greedy(m_toy1, 12, RegularizationParams(slack_add=2))
        assert sched == PreSchedule({"A": 7, "B": 5})
        assert journal.entries[-1].cumulative == 12

    def test_beta_rewards_second_cover(self):
        m = det([("A", "p1", 1), ("B", "p1", 1), ("C", "p2", 10)])
        base, _ = construct_greedy(m, 12)
        assert base == PreSchedule({"A": 1, "C": 10})
        robust, journal = construct_greedy(m, 12, RegularizationParams(beta=0.5))
        assert robust == PreSchedule({"A": 1, "B": 1, "C": 10})
        assert journal.entries[1].newly_covered == ()
        assert journal.entries[1].criterion == pytest.approx(0.5)

    def test_defaults_spelled_out(self):
        for m in random_instances(30, seed=5, max_strategies=6, max_problems=10):
            base = construct_greedy(m, 30)
            for params in (
                RegularizationParams(alpha=1.0),
                RegularizationParams(beta=0.0),
                RegularizationParams(slack_mul=1.0, slack_add=0),
            ):
                assert construct_greedy(m, 30, params) == base

    @pytest.mark.parametrize("bad", [dict(slack_mul=0.9), dict(slack_add=-1), dict(alpha=-0.1), dict(beta=1.1)])
    def test_param_validation(self, bad):
        with pytest.raises(ValueError):
            RegularizationParams(**bad)

    def test_rounding_half_up(self):
        p = RegularizationParams(slack_mul=1.5, slack_add=1)
        assert [p.emitted(t) for t in (0, 1, 3, 5)] == [0, 3, 6, 9]


class TestExtensionModes:
    m = det([("A", "p1", 1), ("A", "p2", 10), ("B", "p3", 4)])

    def test_full(self):
        sched, journal = construct_greedy(self.m, None)
        assert sched == PreSchedule({"A": 10, "B": 4})
        assert [e.cumulative for e in journal] == [1, 5, 14]

    def test_conservative_only_extends_last_slice(self):
        sched, journal = construct_greedy(self.m, None, mode="conservative")
        assert sched == Schedule((Slice("A", 1), Slice("B", 4), Slice("A", 10)))
        assert [e.delta for e in journal] == [1, 4, 10]

    def test_conservative_extends_most_recent(self, m_toy1):
        sched, _ = construct_greedy(m_toy1, 10, mode=ExtensionMode.CONSERVATIVE)
        assert sched == Schedule((Slice("A", 5), Slice("B", 3)))

    def test_none_charges_full_limit(self, m_toy1):
        sched, journal = construct_greedy(m_toy1, 10, mode="none")
        assert sched == Schedule((Slice("A", 2), Slice("B", 3), Slice("A", 5)))
        assert [e.cumulative for e in journal] == [2, 5, 10]
        assert simulate_schedule(sched, m_toy1) == {"p1", "p2", "p3"}

    @pytest.mark.parametrize("mode", list(ExtensionMode))
    def test_budget_and_journal_coverage(self, mode):
        rng = random.Random(11)
        for _ in range(40):
            m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 12), max_time=20)
            budget = rng.randint(0, 60)
            plain, journal = construct_greedy(m, budget, mode=mode)
            assert plain.total <= budget
            assert journal_coverage(journal) == len(simulate_schedule(plain, m))
            assert all(e.newly_covered for e in journal)
            slack, slack_journal = construct_greedy(m, budget, RegularizationParams(slack_mul=1.2, slack_add=1), mode)
            assert slack.total <= budget
            # inflated limits may pick up problems the raw selection did not count
            assert journal_coverage(slack_journal) <= len(simulate_schedule(slack, m))
            for j, s in ((journal, plain), (slack_journal, slack)):
                cumulative = [e.cumulative for e in j]
                assert cumulative == sorted(set(cumulative))
                assert (cumulative[-1] if cumulative else 0) == s.total


class TestReplay:
    def test_toy1(self, m_toy1):
        _, journal = construct_greedy(m_toy1, None)
        assert replay_journal(journal, 8) == PreSchedule({"A": 5, "B": 3})
        assert replay_journal(journal, 4) == PreSchedule({"A": 2})
        assert replay_journal(journal, 0) == PreSchedule({})

    def test_replay_with_slack_and_modes(self):
        for mode in ExtensionMode:
            for m in random_instances(20, seed=3, max_strategies=5, max_problems=10):
                params = RegularizationParams(slack_mul=1.3, slack_add=1)
                sched, journal = construct_greedy(m, None, params, mode)
                assert replay_journal(journal, 10**9) == sched

    def test_journal_json_roundtrip(self, m_toy1):
        _, journal = construct_greedy(m_toy1, None, RegularizationParams(slack_add=1), "conservative")
        data = json.loads(json.dumps(journal.to_json()))
        assert set(data["entries"][0]) == {"strategy", "new_limit", "delta", "cumulative", "newly_covered", "criterion"}
        assert Journal.from_json(data) == journal


class TestProbabilistic:
    def test_first_slice_from_worked_table(self):
        m = EvaluationMatrix(cells={("s", "p"): OBS1})
        sched, journal = construct_probabilistic(m, 7)
        assert sched == Schedule((Slice("s", 6),))
        assert journal.entries[0].criterion == pytest.approx(0.125)

    def test_candidate_scores(self):
        # (s,3): (1/5)/3, (s,5): (2/4)/5, (s,6): (3/4)/6; cap the budget to expose the runner-up
        m = EvaluationMatrix(cells={("s", "p"): OBS1})
        assert construct_probabilistic(m, 5)[0] == Schedule((Slice("s", 5),))
        assert construct_probabilistic(m, 4)[0] == Schedule((Slice("s", 3),))

    def test_empty(self):
        assert construct_probabilistic(EvaluationMatrix(), 100)[0] == Schedule()

    def test_requires_budget(self, m_toy1):
        with pytest.raises(ValueError):
            construct_probabilistic(m_toy1, None)
        with pytest.raises(ValueError):
            construct_probabilistic(m_toy1, 5, epsilon=0)

    def test_reduces_to_no_extension_greedy(self):
        rng = random.Random(8)
        for _ in range(60):
            m = random_matrix(rng, rng.randint(1, 5), rng.randint(1, 10), max_time=15, timeout=15)
            shifted = EvaluationMatrix(
                m.strategies,
                m.problems,
                {(s, p): [Observation(Status.SOL, t + 1)] for s in m.strategies for p, t in m.solved_by(s).items()},
            )
            for budget in (0, 5, 20, 200):
                prob, _ = construct_probabilistic(m, budget)
                greedy, _ = construct_greedy(shifted, budget, mode="none")
                assert prob == greedy

    def test_large_budget_covers_like_greedy(self):
        for m in random_instances(30, seed=21, max_strategies=5, max_problems=10):
            prob, _ = construct_probabilistic(m, 10**6)
            full, _ = construct_greedy(m, None)
            assert simulate_schedule(prob, m) == simulate_schedule(full, m)

    def test_noisy_budget_feasible(self):
        from portsched.synthetic import random_noisy_matrix

        rng = random.Random(4)
        for _ in range(15):
            m = random_noisy_matrix(rng, 4, 8)
            for params in (RegularizationParams(), RegularizationParams(alpha=1.5, beta=0.3, slack_mul=1.1)):
                sched, journal = construct_probabilistic(m, 60, params)
                assert sched.total <= 60
                assert all(e.criterion >= 1e-9 for e in journal)


class TestOrderAndPad:
    def test_order_toy1(self, m_toy1):
        assert order_slices(PreSchedule({"A": 5, "B": 3}), m_toy1) == Schedule((Slice("A", 5), Slice("B", 3)))
        assert order_slices(PreSchedule({"A": 2, "B": 3}), m_toy1) == Schedule((Slice("A", 2), Slice("B", 3)))

    def test_order_single(self, m_toy1):
        assert order_slices(PreSchedule({"B": 3}), m_toy1) == Schedule((Slice("B", 3),))

    def test_order_uses_additional_coverage(self):
        m = det([("A", "p1", 4), ("A", "p2", 4), ("B", "p1", 1), ("C", "p3", 3)])
        # B first (1/1), then A covers only p2 (1/4) and loses to C (1/3)
        assert order_slices(PreSchedule({"A": 4, "B": 1, "C": 3}), m).pairs() == [("B", 1), ("C", 3), ("A", 4)]

    def test_order_keeps_slices(self):
        for m in random_instances(20, seed=2):
            sched, _ = construct_greedy(m, 40)
            ordered = order_slices(sched, m)
            assert sorted(ordered.pairs()) == sorted(sched.as_schedule().pairs())

    def test_pad(self):
        s = Schedule((Slice("A", 5), Slice("B", 3)))
        assert pad_slices(s, 10) == Schedule((Slice("A", 15), Slice("B", 13)))
        assert pad_slices(s, 0) == s
        assert pad_slices(Schedule(), 10) == Schedule()
        with pytest.raises(ValueError):
            pad_slices(s, -1)
