"""Cross-validated test coverage of greedy schedules over a grid of regularization settings."""

import argparse
import csv
import itertools
import random
import sys

from portsched.distributions import read_meta_file
from portsched.harness import ConstructorConfig, cross_validate
from portsched.model import read_matrix_file
from portsched.synthetic import random_matrix, random_meta


def floats(text):
    return [float(x) for x in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--matrix", help="CSV or JSON matrix; a synthetic one is generated when omitted")
    ap.add_argument("--meta")
    ap.add_argument("--budget", type=int, default=2000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--rounds", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alphas", type=floats, default=[0.8, 1.0, 1.2, 1.5])
    ap.add_argument("--betas", type=floats, default=[0.0, 0.1, 0.3])
    ap.add_argument("--slack-muls", type=floats, default=[1.0, 1.2])
    args = ap.parse_args()

    if args.matrix:
        if not args.meta:
            ap.error("--meta is required with --matrix")
        m, meta = read_matrix_file(args.matrix), read_meta_file(args.meta)
    else:
        rng = random.Random(args.seed)
        m = random_matrix(rng, 30, 300, max_time=1000, density=0.15, timeout=1000)
        meta = random_meta(rng, m)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(("alpha", "beta", "slack_mul", "train_mean", "train_std", "test_mean", "test_std"))
    for alpha, beta, mul in itertools.product(args.alphas, args.betas, args.slack_muls):
        cfg = ConstructorConfig(alpha=alpha, beta=beta, slack_mul=mul)
        s = cross_validate(m, meta, args.k, args.rounds, args.seed, cfg, args.budget)
        fmt = lambda x: "" if x is None else f"{x:.2f}"  # noqa: E731
        out.writerow((alpha, beta, mul, fmt(s.train_mean), fmt(s.train_std), fmt(s.test_mean), fmt(s.test_std)))


if __name__ == "__main__":
    main()
