"""Write a random evaluation matrix (CSV) and matching strategy metadata (JSON)."""

import argparse
import json
import random

from portsched.distributions import meta_to_json
from portsched.model import dump_matrix
from portsched.synthetic import random_matrix, random_meta, random_noisy_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--strategies", type=int, default=20)
    ap.add_argument("--problems", type=int, default=200)
    ap.add_argument("--max-time", type=int, default=1000)
    ap.add_argument("--density", type=float, default=0.3)
    ap.add_argument("--noisy", action="store_true", help="several runs per cell with GUP/TMO outcomes")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--matrix", default="matrix.csv")
    ap.add_argument("--meta", default="meta.json")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    if args.noisy:
        m = random_noisy_matrix(rng, args.strategies, args.problems, max_time=args.max_time)
    else:
        m = random_matrix(rng, args.strategies, args.problems, args.max_time, args.density, timeout=args.max_time)
    with open(args.matrix, "w", encoding="utf-8") as fh:
        fh.write(dump_matrix(m))
    with open(args.meta, "w", encoding="utf-8") as fh:
        json.dump(meta_to_json(random_meta(rng, m)), fh, indent=2)
    print(f"wrote {args.matrix} ({len(m.strategies)}x{len(m.problems)}) and {args.meta}")


if __name__ == "__main__":
    main()
