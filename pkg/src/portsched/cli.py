"""Command-line entry point: ``portsched <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile
from itertools import islice

from .baselines import PSetheoParams, bucket_schedule, curve_to_csv, psetheo, schedule_curve, vbss_curve
from .distributions import (
    LubyConfig,
    conditional_csv,
    conditional_distribution,
    distribution_csv,
    luby_limits,
    option_value_distribution,
    read_meta_file,
    update_sampling_frequencies,
)
from .exact import CapacityError, ExactLimits, ExportError, build_mip, export_lp, min_time_full_cover, solve_exact
from .greedy import (
    ExtensionMode,
    Journal,
    RegularizationParams,
    construct_greedy,
    construct_probabilistic,
    order_slices,
    pad_slices,
    replay_journal,
)
from .harness import ConstructorConfig, cross_validate
from .model import (
    ParseError,
    PreSchedule,
    dump_matrix,
    matrix_to_json,
    read_matrix_file,
    schedule_from_json,
    schedule_from_text,
    schedule_to_json,
    simulate_schedule,
)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write(path: str | None, text: str) -> None:
    """Write to stdout, or atomically to ``path`` (temp file + rename)."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".portsched-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc


def _read_schedule(path):
    if path.endswith(".json"):
        return schedule_from_json(_read_json(path))
    with open(path, encoding="utf-8") as fh:
        return schedule_from_text(fh.read())


def _nonneg(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_regularization(p):
    p.add_argument("--alpha", type=float, default=1.0, help="reward exponent (default 1)")
    p.add_argument("--beta", type=float, default=0.0, help="diminishing reward base (default 0)")
    p.add_argument("--slack-mul", type=float, default=1.0, help="multiplicative slack (default 1)")
    p.add_argument("--slack-add", type=_nonneg, default=0, help="additive slack in Mi (default 0)")


def _regularization(args) -> RegularizationParams:
    return RegularizationParams(args.slack_mul, args.slack_add, args.alpha, args.beta)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="portsched", description="Build and evaluate strategy schedules from evaluation data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("-o", "--output", help="output file (default stdout)")
        return p

    p = command("construct", "greedy schedule construction")
    p.add_argument("--matrix", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--budget", type=_nonneg)
    group.add_argument("--unbounded", action="store_true")
    _add_regularization(p)
    p.add_argument("--extension", choices=[m.value for m in ExtensionMode], default="full")
    p.add_argument("--order", action="store_true", help="order slices by coverage per time")
    p.add_argument("--pad", type=_nonneg, default=0, help="add this many Mi to every slice")
    p.add_argument("--journal", help="write the construction journal JSON here")

    p = command("replay", "replay a journal up to a budget")
    p.add_argument("--journal", required=True)
    p.add_argument("--budget", type=_nonneg, required=True)

    p = command("prob-construct", "greedy construction on success-probability estimates")
    p.add_argument("--matrix", required=True)
    p.add_argument("--budget", type=_nonneg, required=True)
    p.add_argument("--epsilon", type=float, default=1e-9)
    _add_regularization(p)
    p.add_argument("--journal")

    p = command("exact", "integer program export or exact solution")
    p.add_argument("--matrix", required=True)
    p.add_argument("--budget", type=_nonneg, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--export-lp", metavar="FILE")
    group.add_argument("--solve", action="store_true")
    p.add_argument("--max-combinations", type=_positive, default=ExactLimits().max_combinations)
    p.add_argument("--max-seconds", type=float)

    p = command("min-cover", "shortest pre-schedule covering every solvable problem")
    p.add_argument("--matrix", required=True)
    p.add_argument("--max-combinations", type=_positive, default=ExactLimits().max_combinations)
    p.add_argument("--max-seconds", type=float)

    p = command("simulate", "problems solved by a schedule")
    p.add_argument("--matrix", required=True)
    p.add_argument("--schedule", required=True, help="schedule JSON or 'strategy limit' text")

    p = command("curve", "cumulative performance curve as CSV")
    p.add_argument("--matrix", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--journal")
    group.add_argument("--schedule")
    group.add_argument("--vbss", action="store_true")

    p = command("baseline", "reference constructors")
    p.add_argument("--matrix", required=True)
    kinds = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    q = kinds.add_parser("psetheo")
    q.add_argument("--dt", type=_positive, required=True)
    q.add_argument("--l", type=_positive, required=True)
    q.add_argument("--budget", type=_nonneg, required=True)
    q = kinds.add_parser("buckets")
    q.add_argument("--bucket", type=_positive, required=True)
    q.add_argument("--budget", type=_nonneg, required=True)

    p = command("dist", "option value distribution from unique solutions")
    p.add_argument("--matrix", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--option", required=True)
    p.add_argument("--given")

    p = command("freq", "option value frequencies over contributing strategies")
    p.add_argument("--meta", required=True)
    p.add_argument("--option", required=True)

    p = command("luby", "Luby-scaled probe limits")
    p.add_argument("--base", type=_positive, required=True)
    p.add_argument("--cap", type=_positive, required=True)
    p.add_argument("--count", type=_nonneg, required=True)

    p = command("cv", "k-fold cross-validation with witness hygiene")
    p.add_argument("--matrix", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--rounds", type=_positive, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_nonneg, required=True)
    p.add_argument("--constructor", choices=["greedy", "probabilistic", "exact", "psetheo", "buckets"], default="greedy")
    _add_regularization(p)
    p.add_argument("--extension", choices=[m.value for m in ExtensionMode], default="full")
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--dt", type=_positive, default=1)
    p.add_argument("--l", type=_positive, default=100)
    p.add_argument("--bucket", type=_positive, default=1000)
    p.add_argument("--include-unwitnessed", action="store_true")
    p.add_argument("--summary-csv", help="also write a one-row CSV summary here")

    p = command("matrix", "convert an evaluation matrix between CSV and JSON")
    p.add_argument("--matrix", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    return parser


def _construct(args):
    matrix = read_matrix_file(args.matrix)
    budget = None if args.unbounded else args.budget
    schedule, journal = construct_greedy(matrix, budget, _regularization(args), args.extension)
    if args.order:
        schedule = order_slices(schedule, matrix)
    if args.pad:
        schedule = pad_slices(schedule, args.pad)
    if args.journal:
        _write(args.journal, _dump(journal.to_json()))
    _write(args.output, _dump(schedule_to_json(schedule)))


def _prob_construct(args):
    matrix = read_matrix_file(args.matrix)
    schedule, journal = construct_probabilistic(matrix, args.budget, _regularization(args), args.epsilon)
    if args.journal:
        _write(args.journal, _dump(journal.to_json()))
    _write(args.output, _dump(schedule_to_json(schedule)))


def _exact(args):
    matrix = read_matrix_file(args.matrix)
    if args.export_lp:
        _write(args.export_lp, export_lp(build_mip(matrix, args.budget)))
        return
    pre, coverage = solve_exact(matrix, args.budget, ExactLimits(args.max_combinations, args.max_seconds))
    out = schedule_to_json(pre)
    out["objective"] = coverage
    _write(args.output, _dump(out))


def _min_cover(args):
    matrix = read_matrix_file(args.matrix)
    pre, total = min_time_full_cover(matrix, ExactLimits(args.max_combinations, args.max_seconds))
    out = schedule_to_json(pre)
    out["objective"] = total
    out["covered"] = len(simulate_schedule(pre, matrix))
    _write(args.output, _dump(out))


def _simulate(args):
    matrix = read_matrix_file(args.matrix)
    solved = simulate_schedule(_read_schedule(args.schedule), matrix)
    _write(args.output, _dump({"solved": sorted(solved), "count": len(solved)}))


def _curve(args):
    matrix = read_matrix_file(args.matrix)
    if args.vbss:
        curve = vbss_curve(matrix)
    elif args.journal:
        curve = schedule_curve(Journal.from_json(_read_json(args.journal)), matrix)
    else:
        curve = schedule_curve(_read_schedule(args.schedule), matrix)
    _write(args.output, curve_to_csv(curve))


def _baseline(args):
    matrix = read_matrix_file(args.matrix)
    if args.kind == "psetheo":
        schedule = psetheo(matrix, PSetheoParams(args.dt, args.l, args.budget))
    else:
        schedule = bucket_schedule(matrix, args.bucket, args.budget)
    out = schedule_to_json(schedule)
    out["covered"] = len(simulate_schedule(schedule, matrix))
    _write(args.output, _dump(out))


def _dist(args):
    matrix = read_matrix_file(args.matrix)
    meta = read_meta_file(args.meta)
    if args.given:
        text = conditional_csv(conditional_distribution(matrix, meta, args.option, args.given))
    else:
        text = distribution_csv(option_value_distribution(matrix, meta, args.option))
    _write(args.output, text)


def _freq(args):
    freqs = update_sampling_frequencies(read_meta_file(args.meta), args.option)
    _write(args.output, _dump({v: {"count": c, "frequency": f} for v, (c, f) in freqs.items()}))


def _luby(args):
    values = islice(luby_limits(LubyConfig(args.base, args.cap)), args.count)
    _write(args.output, "".join(f"{v}\n" for v in values))


def _cv(args):
    matrix = read_matrix_file(args.matrix)
    meta = read_meta_file(args.meta)
    config = ConstructorConfig(
        args.constructor, args.alpha, args.beta, args.slack_mul, args.slack_add,
        args.extension, args.epsilon, args.dt, args.l, args.bucket,
    )
    summary = cross_validate(matrix, meta, args.k, args.rounds, args.seed, config, args.budget, args.include_unwitnessed)
    if args.summary_csv:
        _write(args.summary_csv, summary.csv_row())
    _write(args.output, _dump(summary.to_json()))


def _matrix(args):
    matrix = read_matrix_file(args.matrix)
    _write(args.output, _dump(matrix_to_json(matrix)) if args.format == "json" else dump_matrix(matrix))


HANDLERS = {
    "construct": _construct,
    "replay": lambda a: _write(a.output, _dump(schedule_to_json(replay_journal(Journal.from_json(_read_json(a.journal)), a.budget)))),
    "prob-construct": _prob_construct,
    "exact": _exact,
    "min-cover": _min_cover,
    "simulate": _simulate,
    "curve": _curve,
    "baseline": _baseline,
    "dist": _dist,
    "freq": _freq,
    "luby": _luby,
    "cv": _cv,
    "matrix": _matrix,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        HANDLERS[args.command](args)
    except CapacityError as exc:
        print(f"portsched: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ParseError, ExportError, OSError, KeyError) as exc:
        print(f"portsched: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"portsched: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
