"""
Helpers shared by the command modules: channel resolution, grids, number
formatting and CSV output.
"""
from pathlib import Path
from typing import Iterable, List, Optional, TextIO, Union
import logging
import sys

import numpy as np
import pandas as pd

from app.config import settings
from app.exceptions import InvalidGridError
from app.quantum.channels import KrausChannel, build_channel, load_channel
from app.quantum.discrimination import SignalPair, best_known_pair
from app.quantum.optimizer import seesaw
from app.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

QUICK_RESTARTS = 4
QUICK_TRIALS = 100_000


def parse_grid(text: str):
    """'start:stop:steps' -> (start, stop, steps)"""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidGridError(f"Grid must look like start:stop:steps, got '{text}'")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidGridError(f"Grid '{text}' does not parse as start:stop:steps") from None
    check_grid(start, stop, steps)
    return start, stop, steps


def check_grid(start: float, stop: float, steps: int) -> None:
    if steps < 1:
        raise InvalidGridError(f"Grid needs at least one step, got {steps}")
    if not 0.0 <= start <= stop <= 1.0:
        raise InvalidGridError(f"Grid must satisfy 0 <= start <= stop <= 1, got {start}:{stop}")
    if steps == 1 and start != stop:
        raise InvalidGridError(f"A one-point grid needs start == stop, got {start}:{stop}")


def grid_points(config: RunConfig) -> List[float]:
    check_grid(config.grid_start, config.grid_stop, config.grid_steps)
    points = np.linspace(config.grid_start, config.grid_stop, config.grid_steps)
    # Round away linspace noise so x = 0.33 prints and compares as 0.33
    return [float(round(x, 12)) for x in points]


def is_two_pauli(config: RunConfig) -> bool:
    return config.channel_file is None and config.channel == "two_pauli"


def resolve_channel(config: RunConfig, x: Optional[float] = None) -> KrausChannel:
    if config.channel_file is not None:
        return load_channel(config.channel_file)
    return build_channel(config.channel, config.x if x is None else x)


def effective_restarts(config: RunConfig) -> int:
    return min(config.restarts, QUICK_RESTARTS) if config.quick else config.restarts


def effective_trials(config: RunConfig) -> int:
    return min(config.trials, QUICK_TRIALS) if config.quick else config.trials


def standard_score(empirical: float, analytic: float, standard_error: float) -> float:
    """Gap in standard errors; a zero standard error scores 0 only when the gap is 0"""
    deviation = abs(empirical - analytic)
    if standard_error > 0.0:
        return deviation / standard_error
    return 0.0 if deviation == 0.0 else float("inf")


def reference_pair(config: RunConfig, channel: KrausChannel) -> SignalPair:
    """Closed-form best pair for two_pauli, seesaw optimum for anything else"""
    if is_two_pauli(config):
        return best_known_pair(config.x)
    return seesaw(channel, seed=config.seed, restarts=effective_restarts(config)).best_pair


def fixed(value: float) -> str:
    return "nan" if value is None or np.isnan(value) else f"{value:.6f}"


def full(value: float) -> str:
    return "nan" if value is None or np.isnan(value) else repr(float(value))


def with_provenance(rows: Iterable[dict], config: RunConfig) -> pd.DataFrame:
    frame = pd.DataFrame(list(rows))
    frame["seed"] = config.seed
    frame["version"] = settings.APP_VERSION
    return frame


def write_csv(frame: pd.DataFrame, out: Optional[Union[str, Path]] = None, stream: Optional[TextIO] = None) -> None:
    if out is not None:
        frame.to_csv(out, index=False)
        logger.info(f"Wrote {len(frame)} rows to {out}")
    else:
        frame.to_csv(stream or sys.stdout, index=False)
