"""Command line entry point.

Exit status: 0 all checks pass, 2 a numerical check failed, 3 the scenario is
invalid, 4 the run blew up (non-finite or runaway values, ill-conditioned map).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import (
    BlowUp,
    ConditionCapExceeded,
    DimensionMismatch,
    IllConditioned,
    InitialBasisInvalid,
    InvalidScenario,
    NipError,
    NotHermitianAnsatz,
    ReferenceNotOrthonormal,
)
from .fixtures import FIXTURES, get_fixture
from .report import FORMATS, emit_report, format_summary
from .runner import run_scenario
from .scenario import load_scenario

__all__ = ["main", "exit_code_for", "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_INVALID", "EXIT_BLOWUP"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INVALID = 3
EXIT_BLOWUP = 4

_INVALID = (
    InvalidScenario, DimensionMismatch, NotHermitianAnsatz, InitialBasisInvalid, ReferenceNotOrthonormal
)
_BLOWUP = (BlowUp, IllConditioned, ConditionCapExceeded)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, _INVALID):
        return EXIT_INVALID
    if isinstance(exc, _BLOWUP):
        return EXIT_BLOWUP
    if isinstance(exc, NipError):
        return EXIT_CHECK_FAILED
    if isinstance(exc, (ValueError, KeyError, TypeError)):
        return EXIT_INVALID
    raise exc


def _scenario(arg: str, seed):
    path = Path(arg)
    if path.exists():
        return load_scenario(path, seed)
    try:
        return get_fixture(arg)
    except KeyError:
        raise InvalidScenario(f"{arg!r} is neither a scenario file nor a fixture name") from None


def _cmd_run(args) -> int:
    try:
        scenario = _scenario(args.scenario, args.seed)
        result = run_scenario(scenario, steps=args.steps, tol=args.tol)
    except Exception as exc:  # noqa: BLE001 - mapped to an exit status
        code = exit_code_for(exc)
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    sys.stdout.write(format_summary(result))
    if args.out is not None:
        for path in emit_report(result, args.out, args.format or ["summary"]):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def _cmd_fixtures(args) -> int:
    for name, factory in FIXTURES.items():
        s = factory()
        print(f"{name:12s} input_kind={s.input_kind:5s} samples={s.grid.size:5d}  {s.description}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(args.criteria or None, echo=print)
    return EXIT_OK if all(c.passed for c in results) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nipkit", description="Time-dependent quasi-Hermitian model reconstruction"
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or a named fixture")
    run.add_argument("scenario", help="path to a YAML scenario or a fixture name (see 'fixtures list')")
    run.add_argument("--out", type=Path, default=None, help="directory for report files")
    run.add_argument(
        "--format", action="append", choices=FORMATS,
        help="report format to write (repeatable; default summary)",
    )
    run.add_argument("--steps", type=int, default=None, help="RK4 substeps per grid interval")
    run.add_argument("--tol", type=float, default=None, help="use this tolerance for every check")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.set_defaults(func=_cmd_run)

    fx = sub.add_parser("fixtures", help="built-in fixtures")
    fx.add_argument("action", choices=["list"])
    fx.set_defaults(func=_cmd_fixtures)

    st = sub.add_parser("selftest", help="run the acceptance suite")
    st.add_argument("criteria", nargs="*", help="criterion keys (default all)")
    st.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
