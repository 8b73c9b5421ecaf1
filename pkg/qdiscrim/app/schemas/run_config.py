from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, validator


class Command(str, Enum):
    TABLE = "table"
    SWEEP = "sweep"
    OPTIMIZE = "optimize"
    VERIFY = "verify"
    MC = "mc"
    INFO = "info"


class OptimizeMethod(str, Enum):
    SEARCH = "search"
    SEESAW = "seesaw"
    BOTH = "both"


class InfoMode(str, Enum):
    MI = "mi"
    CAPACITY = "capacity"
    COMPARE = "compare"


class RunConfig(BaseModel):
    """One command-line invocation after flags, environment and defaults are merged"""
    command: Command
    channel: str = "two_pauli"
    channel_file: Optional[Path] = None
    x: float = 0.5
    grid_start: float
    grid_stop: float
    grid_steps: int
    seed: int
    restarts: int
    trials: int
    out: Optional[Path] = None
    quick: bool = False
    published: bool = False
    workers: int = -1
    method: OptimizeMethod = OptimizeMethod.BOTH
    mode: InfoMode = InfoMode.MI

    @validator('x', 'grid_start')
    def validate_unit_interval(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError('Channel parameters must lie in [0, 1]')
        return v

    @validator('grid_stop')
    def validate_grid_stop(cls, v, values):
        if not 0.0 <= v <= 1.0:
            raise ValueError('Channel parameters must lie in [0, 1]')
        start = values.get('grid_start')
        if start is not None and v < start:
            raise ValueError(f'Grid stop {v} is below grid start {start}')
        return v

    @validator('grid_steps')
    def validate_grid_steps(cls, v):
        if v < 1:
            raise ValueError('A grid needs at least one step')
        return v

    @validator('restarts', 'trials')
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('Restart and trial counts must be at least 1')
        return v

    @validator('workers')
    def validate_workers(cls, v):
        if v == 0:
            raise ValueError('Workers must be positive, or negative to count back from all cores')
        return v

    @property
    def label(self) -> str:
        if self.channel_file is not None:
            return str(self.channel_file)
        return self.channel
