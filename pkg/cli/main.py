"""
Command-line front end: bound, sweep, verify, slice

Exit codes: 0 success, 1 verification failure, 2 I/O or parse error,
64 usage error.
"""
import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from core.exceptions import OTBoundsError, ParseError, UsageError
from core.logging import app_logger, setup_logging
from core.models import BoundMethod, CliConfig, Command

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_IO = 2
EXIT_USAGE = 64

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("optimizer")
    group.add_argument("--qcard", type=int, help="auxiliary alphabet size (default |X||Y|+2)")
    group.add_argument("--restarts", type=int, help="multistart count (default 32)")
    group.add_argument("--tol", type=float, help="stop when a step improves less than this (default 1e-9)")
    group.add_argument("--max-iters", dest="max_iters", type=int, help="iterations per restart (default 5000)")
    group.add_argument("--seed", type=int, help="random seed (default 0)")
    group.add_argument("--grid-resolution", dest="grid_resolution", type=int, help="simplex lattice denominator")
    group.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU (env OT_TENSION_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog="ot-tension", description="Upper and lower bounds on OT capacity")
    parser.add_argument(
        "--log-level", dest="log_level", type=str.upper, choices=LOG_LEVELS,
        help="console log level (env OT_TENSION_LOG_LEVEL)",
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliArgumentParser)

    bound = commands.add_parser(Command.BOUND.value, help="bounds for a channel file")
    bound.add_argument("--channel", dest="channel_path", type=Path, help="channel matrix file")
    bound.add_argument("--method", choices=[m.value for m in BoundMethod], default=BoundMethod.BOTH.value)
    _add_optimizer_flags(bound)

    sweep = commands.add_parser(Command.SWEEP.value, help="Z-channel sweep to CSV (and SVG)")
    sweep.add_argument("--steps", type=int, default=21, help="number of t values on [0, 1]")
    sweep.add_argument("--out", type=Path, help="CSV path (stdout if omitted)")
    sweep.add_argument("--svg", type=Path, help="also write a line chart")
    sweep.add_argument("--full", action="store_true", help="full-cardinality search instead of the restricted family")
    _add_optimizer_flags(sweep)

    verify = commands.add_parser(Command.VERIFY.value, help="run the verification suites")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--fail-fast", dest="fail_fast", action="store_true")
    verify.add_argument("--residuals-csv", dest="residuals_csv", type=Path)
    _add_optimizer_flags(verify)

    slice_ = commands.add_parser(Command.SLICE.value, help="s1=0 tension-region frontier of a joint file")
    slice_.add_argument("--joint", dest="joint_path", type=Path, help="joint distribution file")
    slice_.add_argument("--num-points", dest="num_points", type=int, default=11)
    slice_.add_argument("--out", type=Path, help="CSV path (stdout if omitted)")
    _add_optimizer_flags(slice_)

    return parser


def parse_config(argv: Optional[List[str]] = None) -> CliConfig:
    """Parse and validate; every failure surfaces as UsageError"""
    args = build_parser().parse_args(argv)
    values = {key: value for key, value in vars(args).items() if value is not None}
    try:
        return CliConfig(**values)
    except ValidationError as e:
        messages = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
        raise UsageError(messages)


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)


def run_bound(cfg: CliConfig) -> int:
    from tools.bounds import ac13_bound, new_upper_bound
    from tools.channel import parse_channel
    from tools.report import format_bound

    ch = parse_channel(cfg.channel_path.read_bytes())
    opts = cfg.optimizer_options()

    new = None
    if cfg.method in (BoundMethod.NEW, BoundMethod.BOTH):
        new = new_upper_bound(ch, opts, qcard=cfg.qcard, threads=cfg.threads)
        print(format_bound("new", new))
    if cfg.method in (BoundMethod.AC13, BoundMethod.BOTH):
        extra = [new.arg_px] if new is not None else []
        print(format_bound("ac13", ac13_bound(ch, opts, extra_candidates=extra, threads=cfg.threads)))
    return EXIT_OK


def run_sweep(cfg: CliConfig) -> int:
    from tools.bounds import zchannel_sweep
    from tools.report import render_sweep_svg, write_sweep_csv

    t_values = np.linspace(0.0, 1.0, cfg.steps).tolist()
    rows = zchannel_sweep(
        t_values, cfg.optimizer_options(), full_search=cfg.full, threads=cfg.threads, qcard=cfg.qcard
    )
    _emit(write_sweep_csv(rows, cfg.out), cfg.out)
    if cfg.svg is not None:
        render_sweep_svg(rows, cfg.svg)
    app_logger.info(f"Sweep written: {len(rows)} rows" + (f" to {cfg.out}" if cfg.out else ""))
    return EXIT_OK


def run_verify(cfg: CliConfig) -> int:
    from tools.report import format_verify_report, write_residual_csv
    from workflow import verification_workflow

    opts = cfg.optimizer_options()
    state = verification_workflow.run(
        seed=opts.seed, trials=cfg.trials, fail_fast=cfg.fail_fast, threads=cfg.threads, opts=opts
    )
    sys.stdout.write(format_verify_report(state.results))
    if cfg.residuals_csv is not None:
        write_residual_csv(state.results, cfg.residuals_csv)
    return EXIT_OK if all(result.passed for result in state.results) else EXIT_VERIFY_FAILED


def run_slice(cfg: CliConfig) -> int:
    from tools.information import parse_joint
    from tools.report import write_slice_csv
    from tools.tension import tension_slice

    joint = parse_joint(cfg.joint_path.read_bytes())
    points = tension_slice(joint, cfg.num_points, cfg.qcard, cfg.optimizer_options())
    _emit(write_slice_csv(points, cfg.out), cfg.out)
    return EXIT_OK


HANDLERS: Dict[Command, Callable[[CliConfig], int]] = {
    Command.BOUND: run_bound,
    Command.SWEEP: run_sweep,
    Command.VERIFY: run_verify,
    Command.SLICE: run_slice,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one command and return its exit code"""
    try:
        cfg = parse_config(argv)
    except UsageError as e:
        app_logger.error(f"Usage error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK

    if cfg.log_level is not None:
        setup_logging(cfg.log_level)

    try:
        return HANDLERS[cfg.command](cfg)
    except ParseError as e:
        app_logger.error(f"Parse error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        app_logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (OTBoundsError, ValidationError) as e:
        app_logger.error(f"Invalid arguments: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
