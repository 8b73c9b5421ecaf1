"""
qdiscrim command line: tabulate, sweep, optimize, verify, simulate and
measure information for binary signalling through two channel uses.

CSV goes to stdout (or --out); logs go to stderr.
Exit codes: 0 success, 1 verification failure, 2 usage error, 3 input-file error.
"""
from pathlib import Path
from typing import List, Optional
import argparse
import logging
import sys

from pydantic import ValidationError

from app.commands import info, mc, optimize, sweep, table, verify
from app.commands.common import parse_grid, write_csv
from app.config import settings
from app.exceptions import ChannelFileError, InvalidGridError, ParameterOutOfRangeError, QDiscrimError
from app.schemas.run_config import Command, RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT_FILE = 3

COMMANDS = {
    Command.TABLE: table.run,
    Command.SWEEP: sweep.run,
    Command.OPTIMIZE: optimize.run,
    Command.MC: mc.run,
    Command.INFO: info.run,
}


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Minimum-error discrimination of one bit sent through two uses of a noisy qubit channel",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--channel", help="built-in channel name or path to a channel JSON file")
    parser.add_argument("--x", type=float, help="channel parameter in [0, 1]")
    parser.add_argument("--grid", help="parameter grid as start:stop:steps")
    parser.add_argument("--seed", type=int, help=f"random seed (default {settings.SEED}, env QDISCRIM_SEED)")
    parser.add_argument("--restarts", type=int, help="optimizer restarts")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--out", type=Path, help="CSV output path (default stdout)")
    parser.add_argument("--quick", action="store_true", help="reduced sample counts")
    parser.add_argument("--paper", dest="published", action="store_true", help="show published values next to computed ones")
    parser.add_argument("--workers", type=int, help="worker processes, -1 for all cores")
    parser.add_argument("--method", choices=["search", "seesaw", "both"], default="both")
    parser.add_argument("--mode", choices=["mi", "capacity", "compare"], default="mi")
    parser.add_argument("--verbose", "-v", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    return parser


def _is_channel_file(channel: str) -> bool:
    return channel.endswith(".json") or Path(channel).is_file()


def make_config(args: argparse.Namespace) -> RunConfig:
    """Flags win over QDISCRIM_* environment variables, which win over defaults"""
    if args.grid is not None:
        start, stop, steps = parse_grid(args.grid)
    else:
        start, stop, steps = settings.GRID_START, settings.GRID_STOP, settings.GRID_STEPS

    channel = args.channel or "two_pauli"
    channel_file = Path(channel) if _is_channel_file(channel) else None
    return RunConfig(
        command=args.command,
        channel=channel,
        channel_file=channel_file,
        x=0.5 if args.x is None else args.x,
        grid_start=start,
        grid_stop=stop,
        grid_steps=steps,
        seed=settings.SEED if args.seed is None else args.seed,
        restarts=settings.RESTARTS if args.restarts is None else args.restarts,
        trials=settings.TRIALS if args.trials is None else args.trials,
        out=args.out,
        quick=args.quick,
        published=args.published,
        workers=settings.WORKERS if args.workers is None else args.workers,
        method=args.method,
        mode=args.mode,
    )


def run(config: RunConfig) -> int:
    if config.command == Command.VERIFY:
        frame, passed = verify.run(config)
        write_csv(frame, config.out)
        return EXIT_OK if passed else EXIT_FAILED

    frame = COMMANDS[config.command](config)
    write_csv(frame, config.out)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        config = make_config(args)
    except (InvalidGridError, ValidationError) as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE

    logger.info(f"Starting {config.command.value} (seed {config.seed}, version {settings.APP_VERSION})")
    try:
        code = run(config)
    except ChannelFileError as e:
        logger.error(f"Channel file error: {e}")
        return EXIT_INPUT_FILE
    except (InvalidGridError, ParameterOutOfRangeError) as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE
    except QDiscrimError as e:
        logger.error(f"{config.command.value} failed: {e}")
        return EXIT_FAILED
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE

    logger.info(f"Finished {config.command.value} with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
