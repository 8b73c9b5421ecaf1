"""
Information carried by the best pair's outputs: mutual information under the
Helstrom measurement, a capacity lower bound, or the one-use versus two-use
comparison.
"""
import logging

import pandas as pd

from app.commands.common import effective_restarts, fixed, full, reference_pair, resolve_channel, with_provenance
from app.quantum.discrimination import two_use_helstrom
from app.quantum.info_theory import (
    Ensemble,
    binary_entropy,
    capacity_fixed_outputs,
    helstrom_povm,
    mutual_information,
    two_use_vs_single_use,
)
from app.schemas.run_config import InfoMode, RunConfig

logger = logging.getLogger(__name__)


def _outputs(config: RunConfig, channel):
    pair = reference_pair(config, channel)
    return pair, [channel.apply_two(r) for r in pair.densities()]


def run(config: RunConfig) -> pd.DataFrame:
    channel = resolve_channel(config)
    logger.info(f"Information mode '{config.mode.value}' on '{channel.name}'")

    if config.mode == InfoMode.MI:
        pair, outputs = _outputs(config, channel)
        result = two_use_helstrom(channel, pair)
        info = mutual_information(Ensemble.from_states(outputs), helstrom_povm(result))
        row = {
            "channel": channel.name,
            "mode": config.mode.value,
            "mutual_information": fixed(info),
            "pe": fixed(result.pe),
            "symmetric_channel_value": fixed(1.0 - binary_entropy(result.pe)),
            "mutual_information_full": full(info),
        }
    elif config.mode == InfoMode.CAPACITY:
        _, outputs = _outputs(config, channel)
        result = capacity_fixed_outputs(outputs, povm_restarts=effective_restarts(config), seed=config.seed)
        row = {
            "channel": channel.name,
            "mode": config.mode.value,
            "capacity": fixed(result.capacity),
            "prior0": fixed(result.priors[0]),
            "prior1": fixed(result.priors[1]),
            "lower_bound": result.lower_bound,
            "capacity_full": full(result.capacity),
        }
    else:
        report = two_use_vs_single_use(channel, budget=effective_restarts(config), seed=config.seed)
        row = {
            "channel": channel.name,
            "mode": config.mode.value,
            "single_use": fixed(report.single_use),
            "two_use": fixed(report.two_use),
            "ratio": fixed(report.ratio),
            "lower_bound": report.lower_bound,
            "single_use_full": full(report.single_use),
            "two_use_full": full(report.two_use),
        }
    return with_provenance([row], config)
