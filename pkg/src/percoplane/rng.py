"""Counter-based random streams.

Each trial draws from a Philox generator keyed by (seed, trial id), so a
trial's randomness is a pure function of those two integers.  Trials can
run in any order on any number of threads and still reproduce exactly.
"""

from __future__ import annotations

import numpy as np


def trial_rng(seed: int, trial_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(np.uint64(seed), np.uint64(trial_id))))


def trial_permutation(seed: int, trial_id: int, n: int) -> np.ndarray:
    return trial_rng(seed, trial_id).permutation(n)


def trial_bernoulli(seed: int, trial_id: int, n: int, p: float) -> np.ndarray:
    return trial_rng(seed, trial_id).random(n) < p
