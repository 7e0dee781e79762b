"""Deterministic seed derivation for nested randomized stages."""

import numpy as np


def derive_seed(*parts: int) -> int:
    """Map a tuple of nonnegative integers to a single reproducible seed.

    Uses numpy's SeedSequence mixing, which is stable across platforms and
    numpy versions, so nested stages (repeats, iterations, partitions, folds)
    can each get an independent stream from one master seed.
    """
    return int(np.random.SeedSequence(parts).generate_state(1)[0])
