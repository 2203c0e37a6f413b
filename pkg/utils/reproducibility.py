"""
Reproducibility
Process-wide torch settings so that equal seeds give equal runs.
"""

import logging
from typing import Optional

import torch

logger = logging.getLogger(__name__)


def configure_torch(num_threads: Optional[int] = None, deterministic: bool = True):
    """
    Apply runtime settings to torch.

    Args:
        num_threads: intra-op CPU threads (None keeps torch's default)
        deterministic: refuse nondeterministic kernels
    """
    if num_threads is not None:
        torch.set_num_threads(num_threads)
    torch.use_deterministic_algorithms(deterministic, warn_only=True)
    logger.debug(f"torch threads={torch.get_num_threads()} deterministic={deterministic}")

