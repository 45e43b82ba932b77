"""Deterministic random streams.

All randomness in the package flows through ``numpy.random.Generator``
instances built from ``SeedSequence`` spawn keys, so any run is a pure
function of its integer seed material.  The draw order inside one
relaxation/reset is fixed and documented:

1. initial state bits, one bulk draw of ``N`` integers in {0, 1},
2. node indices, one bulk draw of ``T`` integers in [0, N).

Changing that order would silently change every downstream result, so both
draws live here next to their contract.
"""

from __future__ import annotations

import numpy as np

# An RngStream in this package is simply a numpy Generator with PCG64 state.
RngStream = np.random.Generator


def make_rng(seed: int) -> RngStream:
    """Root stream for a single integer seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn(master_seed: int, *key: int) -> RngStream:
    """Child stream addressed by an integer key tuple.

    Distinct key tuples give statistically independent streams; the same
    tuple always gives the same stream.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def draw_state(rng: RngStream, n: int) -> np.ndarray:
    """Uniform random bipolar state of length ``n`` (draw 1 of the contract)."""
    return rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0


def draw_node_indices(rng: RngStream, n: int, steps: int) -> np.ndarray:
    """Uniform node index per step, with replacement (draw 2 of the contract)."""
    return rng.integers(0, n, size=steps)
