"""
Numerical optimum of the two-use error for one channel, against the product
encoding and, for two_pauli, the closed-form value.
"""
import logging

import pandas as pd

from app.commands.common import effective_restarts, fixed, full, is_two_pauli, resolve_channel, with_provenance
from app.quantum.discrimination import ansatz_optimum, best_encoding, product_baseline_pe
from app.quantum.optimizer import search_optimal_inputs, search_product_inputs, seesaw
from app.schemas.run_config import OptimizeMethod, RunConfig

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> pd.DataFrame:
    channel = resolve_channel(config)
    restarts = effective_restarts(config)
    logger.info(f"Optimizing inputs for '{channel.name}' ({config.method.value}, {restarts} restarts)")

    reports = []
    if config.method in (OptimizeMethod.SEARCH, OptimizeMethod.BOTH) and channel.dim == 2:
        reports.append(search_optimal_inputs(channel, restarts=restarts, seed=config.seed, n_jobs=config.workers))
    if config.method in (OptimizeMethod.SEESAW, OptimizeMethod.BOTH) or channel.dim != 2:
        reports.append(seesaw(channel, seed=config.seed, restarts=restarts, n_jobs=config.workers))

    if is_two_pauli(config):
        product = product_baseline_pe(config.x)
        _, analytic = best_encoding(config.x)
        alpha = ansatz_optimum(config.x).alpha
    else:
        product = (
            search_product_inputs(channel, restarts=restarts, seed=config.seed, n_jobs=config.workers).best_pe
            if channel.dim == 2
            else float("nan")
        )
        analytic, alpha = float("nan"), float("nan")

    rows = [
        {
            "channel": channel.name,
            "method": report.method,
            "best_pe": fixed(report.best_pe),
            "pe_product": fixed(product),
            "pe_analytic": fixed(analytic),
            "advantage": fixed(product - report.best_pe),
            "ansatz_alpha": fixed(alpha),
            "converged": report.converged,
            "restarts": report.restarts_used,
            "best_pe_full": full(report.best_pe),
            "pe_product_full": full(product),
        }
        for report in reports
    ]
    return with_provenance(rows, config)
