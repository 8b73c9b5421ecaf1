"""
Monte Carlo estimate of the error rate for the best pair through one channel
"""
import logging

import pandas as pd

from app.commands.common import (
    effective_trials,
    fixed,
    full,
    reference_pair,
    resolve_channel,
    standard_score,
    with_provenance,
)
from app.quantum.discrimination import two_use_helstrom
from app.quantum.montecarlo import simulate_error_rate
from app.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

SIGMA_BAND = 4.0


def run(config: RunConfig) -> pd.DataFrame:
    channel = resolve_channel(config)
    pair = reference_pair(config, channel)
    trials = effective_trials(config)
    analytic = two_use_helstrom(channel, pair).pe

    empirical, standard_error = simulate_error_rate(pair, channel, trials=trials, seed=config.seed, n_jobs=config.workers)
    z = standard_score(empirical, analytic, standard_error)
    if z > SIGMA_BAND:
        logger.warning(f"Empirical error {empirical:.6f} is {z:.1f} standard errors from {analytic:.6f}")

    row = {
        "channel": channel.name,
        "trials": trials,
        "empirical_pe": fixed(empirical),
        "standard_error": fixed(standard_error),
        "pe_analytic": fixed(analytic),
        "z_score": f"{z:.3f}",
        "within_4_sigma": z <= SIGMA_BAND,
        "empirical_pe_full": full(empirical),
        "pe_analytic_full": full(analytic),
    }
    return with_provenance([row], config)
