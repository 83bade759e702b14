"""Compare greedy coverage with the exact optimum on random small instances."""

import argparse
import random
import statistics

from portsched.exact import solve_exact
from portsched.greedy import construct_greedy
from portsched.model import simulate_schedule
from portsched.synthetic import random_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--strategies", type=int, default=5)
    ap.add_argument("--problems", type=int, default=8)
    ap.add_argument("--max-time", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    ratios, worst = [], None
    for i in range(args.instances):
        m = random_matrix(rng, rng.randint(1, args.strategies), rng.randint(1, args.problems), args.max_time)
        budget = rng.randint(1, 3 * args.max_time)
        greedy = len(simulate_schedule(construct_greedy(m, budget)[0], m))
        _, opt = solve_exact(m, budget)
        if opt:
            ratio = greedy / opt
            ratios.append(ratio)
            if worst is None or ratio < worst[0]:
                worst = (ratio, i, greedy, opt, budget)
    print(f"instances with positive optimum: {len(ratios)}")
    print(f"mean greedy/optimal: {statistics.fmean(ratios):.4f}")
    print(f"share optimal: {sum(r == 1 for r in ratios) / len(ratios):.3f}")
    if worst:
        print("worst: ratio {:.3f} at instance {} (greedy {}, optimum {}, budget {})".format(*worst))


if __name__ == "__main__":
    main()
