"""Deterministic per-trial random streams.

Every random draw in a simulation flows from a generator derived from the
master seed plus a structured path (trial index, purpose, link, UE), so
trials are reproducible independently of execution order and models share
exactly the randomness they are meant to share.
"""

from __future__ import annotations

import numpy as np

# Stream purposes; part of the seed path, so renumbering changes results.
STREAM_UE_POSITION = 0
STREAM_CLUSTERS = 1
STREAM_FADING = 2

# Link identifiers inside a seed path.
LINK_IDS = {"bs_ue": 0, "bs_ris": 1, "ris_ue": 2}


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by ``(master_seed, *path)``."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path)))
