import random

import pytest

from portsched.model import EvaluationMatrix, Observation, Status, load_matrix

TOY1_CSV = "strategy,problem,status,time\nA,p1,SOL,2\nA,p2,SOL,5\nB,p3,SOL,3\n"
TOY2_CSV = "strategy,problem,status,time\nA,p1,SOL,2\nB,p2,SOL,6\nB,p3,SOL,6\nB,p4,SOL,6\n"
OBS1 = (
    Observation(Status.TMO, 1),
    Observation(Status.SOL, 2),
    Observation(Status.TMO, 3),
    Observation(Status.SOL, 4),
    Observation(Status.SOL, 5),
    Observation(Status.GUP, 6),
)


def toy1():
    return EvaluationMatrix(["A", "B"], ["p1", "p2", "p3"], load_matrix(TOY1_CSV)._cells)


def toy2():
    return EvaluationMatrix(["A", "B"], ["p1", "p2", "p3", "p4"], load_matrix(TOY2_CSV)._cells)


@pytest.fixture
def m_toy1():
    return toy1()


@pytest.fixture
def m_toy2():
    return toy2()


@pytest.fixture
def obs1():
    return OBS1


def random_instances(count, seed, max_strategies=5, max_problems=8, max_time=32):
    rng = random.Random(seed)
    from portsched.synthetic import random_matrix

    for _ in range(count):
        yield random_matrix(
            rng,
            rng.randint(1, max_strategies),
            rng.randint(1, max_problems),
            max_time=max_time,
            density=rng.uniform(0.2, 0.7),
        )


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
