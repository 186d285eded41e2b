"""
cli.py - command-line interface.

    besynth synth --env E --goal G --part P [--alg 3] [--dot out.dot] [--json out.json]
    besynth bench counter --n-max 2 --k-max 3 [--algs 1,2,3] [--timeout S] [--csv out.csv]
    besynth validate --env E --goal G --part P [--alg 3] [--max-states 8]
    besynth dfa --formula F --part P [--dot out.dot]

Exit codes: 0 success, 1 usage or input error, 2 resource limit or
timeout, 3 invariant violation or a dominated strategy.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from typing import Optional, Sequence

from besynth import dfa_explicit, ltlf, runtime
from besynth.besteffort import ALGORITHMS, Problem, synthesize
from besynth.errors import (
    BesynthError,
    FormulaSyntaxError,
    InvariantViolation,
    PartitionError,
    ResourceLimitError,
    TraceError,
    UndeclaredAtomError,
    UsageError,
)
from producers.bench_producer import LIVE_FILE_NAME, run_bench
from producers.counter_game_producer import MAX_SIZE, MIN_SIZE, counter_grid
from utils.utils_config import get_data_dir
from utils.utils_logger import get_log_file_path, logger

#####################################
# Exit Codes
#####################################

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESOURCE = 2
EXIT_INVARIANT = 3

INPUT_ERRORS = (UsageError, FormulaSyntaxError, UndeclaredAtomError, PartitionError, TraceError, OSError)
RESOURCE_ERRORS = (ResourceLimitError, TimeoutError, MemoryError)

#####################################
# Parser
#####################################


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _add_problem_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--env", required=True, type=pathlib.Path, help="environment specification file")
    parser.add_argument("--goal", required=True, type=pathlib.Path, help="agent goal file")
    parser.add_argument("--part", required=True, type=pathlib.Path, help="partition file")
    parser.add_argument("--alg", default="3", choices=ALGORITHMS, help="synthesis algorithm")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="besynth", description="Best-effort synthesis for LTLf goals")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    synth = commands.add_parser("synth", help="synthesize a best-effort strategy")
    _add_problem_arguments(synth)
    synth.add_argument("--dot", type=pathlib.Path, help="write the strategy transducer as DOT")
    synth.add_argument("--json", type=pathlib.Path, help="write the result record and strategy summary")

    bench = commands.add_parser("bench", help="run a benchmark grid")
    bench.add_argument("family", choices=("counter",))
    bench.add_argument("--n-max", type=int, required=True)
    bench.add_argument("--k-max", type=int, required=True)
    bench.add_argument("--n-min", type=int, default=1)
    bench.add_argument("--k-min", type=int, default=1)
    bench.add_argument("--algs", default="1,2,3", help="comma-separated subset of 1,2,3,reactive")
    bench.add_argument("--timeout", type=float, default=None, help="seconds per instance")
    bench.add_argument("--jobs", type=int, default=None, help="parallel worker processes")
    bench.add_argument("--csv", type=pathlib.Path, help="CSV output file")
    bench.add_argument("--live", type=pathlib.Path, help="JSON-lines stream of finished records")

    validate = commands.add_parser("validate", help="check a synthesized strategy for dominance")
    _add_problem_arguments(validate)
    validate.add_argument("--max-states", type=int, default=runtime.ValidationBounds.states)
    validate.add_argument("--max-env-props", type=int, default=runtime.ValidationBounds.env_props)

    dfa = commands.add_parser("dfa", help="translate a formula to a minimal DFA")
    dfa.add_argument("--formula", required=True, type=pathlib.Path)
    dfa.add_argument("--part", required=True, type=pathlib.Path)
    dfa.add_argument("--dot", type=pathlib.Path, help="write the DFA as DOT")
    return parser


#####################################
# Commands
#####################################


def _write(path: pathlib.Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"Wrote {path}")


def cmd_synth(args: argparse.Namespace) -> int:
    problem = Problem.from_files(args.env, args.goal, args.part)
    strategy = synthesize(problem, args.alg)
    print(strategy.verdict.upper())
    if args.json:
        _write(args.json, strategy.to_json_lines())
    else:
        sys.stdout.write(strategy.to_json_lines())
    if args.dot:
        _write(args.dot, runtime.transducer_to_dot(strategy))
    return EXIT_OK


def _parse_algorithms(text: str) -> list[str]:
    algorithms = [a.strip() for a in text.split(",") if a.strip()]
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if not algorithms or unknown:
        raise UsageError(f"--algs must be a comma-separated subset of {','.join(ALGORITHMS)}")
    return algorithms


def cmd_bench(args: argparse.Namespace) -> int:
    algorithms = _parse_algorithms(args.algs)
    for name, low, high in (("n", args.n_min, args.n_max), ("k", args.k_min, args.k_max)):
        if not MIN_SIZE <= low <= high <= MAX_SIZE:
            raise UsageError(f"--{name}-min/--{name}-max must satisfy {MIN_SIZE} <= min <= max <= {MAX_SIZE}")
    grid = counter_grid(args.n_max, args.k_max, args.n_min, args.k_min)
    live = args.live if args.live else get_data_dir().joinpath(LIVE_FILE_NAME)
    records = run_bench(grid, algorithms, timeout_s=args.timeout, jobs=args.jobs, csv_path=args.csv, live_path=live)
    for record in records:
        print(f"n={record.n} K={record.K} alg={record.alg} {record.verdict} {record.t_total_ms:.1f}ms")
    timeouts = sum(r.timeout for r in records)
    errors = [r for r in records if r.error]
    if errors:
        raise InvariantViolation(f"{len(errors)} bench instances failed, first: {errors[0].error}")
    return EXIT_RESOURCE if timeouts else EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    problem = Problem.from_files(args.env, args.goal, args.part)
    strategy = synthesize(problem, args.alg)
    bounds = runtime.ValidationBounds(states=args.max_states, env_props=args.max_env_props)
    report = runtime.validate(problem, strategy, bounds)
    print(report.status.upper())
    print(json.dumps(report.to_dict()))
    return EXIT_INVARIANT if report.dominated else EXIT_OK


def cmd_dfa(args: argparse.Namespace) -> int:
    partition = ltlf.Partition.load(args.part)
    formula = ltlf.load_formula(args.formula, partition)
    dfa = dfa_explicit.translate(formula, partition)
    sys.stdout.write(dfa_explicit.to_text(dfa))
    if args.dot:
        _write(args.dot, dfa_explicit.to_dot(dfa))
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "bench": cmd_bench,
    "validate": cmd_validate,
    "dfa": cmd_dfa,
}

#####################################
# Entry Point
#####################################


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, RESOURCE_ERRORS):
        return EXIT_RESOURCE
    if isinstance(error, INPUT_ERRORS):
        return EXIT_USAGE
    return EXIT_INVARIANT


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except (BesynthError, OSError, MemoryError) as e:
        code = exit_code_for(e)
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e} (see {get_log_file_path()})", file=sys.stderr)
        return code


def main() -> None:
    sys.exit(cli_main())
