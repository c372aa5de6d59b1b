"""Deterministic fan-out from one user-facing seed to per-stage seeds.

Each pipeline stage draws its seed as subseed(seed, STAGE), where the
stage constants below act as a counter: the pair (seed, stage) feeds a
numpy SeedSequence and the first generated word is the sub-seed. Two
stages never share a sub-seed for the same base seed, and the mapping is
stable across runs and platforms.
"""

from __future__ import annotations

import numpy as np

STAGE_CALIBRATION = 1
STAGE_OPTIMIZER = 2
STAGE_SYNTHESIS = 3
STAGE_PERTURBATION = 4
STAGE_GENERATION = 5


def subseed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence(entropy=(int(seed) & 0xFFFFFFFF, int(stage))).generate_state(1)[0])
