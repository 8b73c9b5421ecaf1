"""
The representative-point table: product and entangled error for two uses of
the two-Pauli channel.
"""
import logging

import pandas as pd

from app.commands.common import fixed, full, with_provenance
from app.quantum.discrimination import (
    PUBLISHED_TABLE,
    PUBLISHED_TYPO_X,
    optimal_entangled,
    product_baseline_pe,
)
from app.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

TYPO_NOTE = "published product value 0.010000 is a typo for the formula value 0.100000"


def table_rows(published: bool = False):
    rows = []
    for x, (published_product, published_entangled) in sorted(PUBLISHED_TABLE.items()):
        product = product_baseline_pe(x)
        entangled = optimal_entangled(x).pe
        row = {
            "x": f"{x:.2f}",
            "pe_product": fixed(product),
            "pe_entangled": fixed(entangled),
            "advantage": fixed(product - entangled),
            "note": TYPO_NOTE if x == PUBLISHED_TYPO_X else "",
            "pe_product_full": full(product),
            "pe_entangled_full": full(entangled),
        }
        if published:
            row["published_product"] = f"{published_product:.6f}"
            row["published_entangled"] = f"{published_entangled:.6f}"
        rows.append(row)
    return rows


def run(config: RunConfig) -> pd.DataFrame:
    logger.info("Tabulating the representative points")
    return with_provenance(table_rows(config.published), config)
