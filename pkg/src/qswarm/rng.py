"""Deterministic, splittable random streams.

Every stochastic operation derives its stream from the master seed plus a
fixed integer path (purpose tag, iteration, step, ...) via ``SeedSequence``,
so results depend only on (seed, call site), never on execution order or
worker count.  Counter-based Philox generators make block-aligned skipping
possible, which is what the chunked samplers use to stay bitwise independent
of the chunk split.
"""

import numpy as np

# purpose tags for seed paths; values are arbitrary but frozen
BORN = 1
ASSEMBLY = 2
EXCHANGE = 3
CROSSOVER = 4
EVOLVE = 5
WALK = 6
TEMPLATE = 7


def philox_key(path):
    """128-bit Philox key derived from an integer path (seed, tag, ...)."""
    ss = np.random.SeedSequence([int(p) for p in path])
    return ss.generate_state(2, dtype=np.uint64)


def generator(path, advance_blocks=0):
    """Philox-backed Generator for the given seed path.

    ``advance_blocks`` skips blocks of 4 float64 draws, letting a consumer
    jump to a sample offset without generating the prefix.
    """
    bg = np.random.Philox(key=philox_key(path))
    if advance_blocks:
        bg.advance(int(advance_blocks))
    return np.random.Generator(bg)


def padded_draws(per_sample):
    """Round a per-sample draw count up to a whole Philox block (4 doubles)."""
    return 4 * ((int(per_sample) + 3) // 4)


def path_id(path):
    """Stable 64-bit integer summarizing a seed path (for logging/digests)."""
    ss = np.random.SeedSequence([int(p) for p in path])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
