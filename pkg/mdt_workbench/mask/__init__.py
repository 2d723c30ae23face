"""Oracle masks, delta masks, granularity diagnostics and mask files."""

from mdt_workbench.mask.io import decode_mask, encode_mask, read_mask, write_mask
from mdt_workbench.mask.oracle import (
    count_isolated_reliable,
    delta_from_static,
    delta_mask,
    oracle_mask,
    reliable_fraction,
    with_delta,
)
