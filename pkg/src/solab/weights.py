"""Constructors for the problem classes fed to the network.

Two families live here: block-modular constraint matrices (hard
optimization surrogates) and Hebbian pattern storage (associative memory).
The traveling-salesman encoding has its own module, :mod:`solab.tsp`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .rng import RngStream, make_rng

__all__ = ["ModularSpec", "modular_weights", "hebbian_store", "random_patterns"]


@dataclass(frozen=True)
class ModularSpec:
    """Block-modular coupling layout.

    ``n`` nodes split into modules of size ``k`` (``k`` must divide ``n``).
    Couplings inside a module have magnitude 1, couplings between modules
    have magnitude ``p`` with 0 < p < 1; every unordered pair gets an
    independent random sign.
    """

    n: int
    k: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.n <= 0 or self.k <= 0:
            raise ConfigurationError(f"n and k must be positive, got n={self.n}, k={self.k}")
        if self.n % self.k != 0:
            raise ConfigurationError(f"module size k={self.k} must divide n={self.n}")
        if not 0.0 < self.p < 1.0:
            raise ConfigurationError(f"inter-module magnitude p={self.p} must lie in (0, 1)")

    @property
    def modules(self) -> int:
        return self.n // self.k


def modular_weights(spec: ModularSpec, rng: RngStream | None = None) -> np.ndarray:
    """Random-sign block matrix: +-1 within a module, +-p between modules.

    Signs are drawn once per unordered pair (one full square of sign bits is
    drawn and only its upper triangle used, keeping the draw order identical
    for every network size); the matrix is symmetric with a zero diagonal by
    construction.
    """
    if rng is None:
        rng = make_rng(spec.seed)
    n = spec.n
    bits = rng.integers(0, 2, size=(n, n), dtype=np.int8)
    signs = np.triu(bits, 1)
    del bits
    signs += signs.T  # mirror the upper triangle; diagonal stays 0
    module = np.arange(n) // spec.k
    w = np.where(module[:, None] == module[None, :], 1.0, spec.p)
    # in-place sign application keeps peak memory ~2 matrices at n=10000
    sign_f = signs.astype(np.float64)
    del signs
    sign_f *= 2.0
    sign_f -= 1.0
    w *= sign_f
    del sign_f
    np.fill_diagonal(w, 0.0)
    return w


def random_patterns(m: int, n: int, rng: RngStream) -> np.ndarray:
    """``m`` random bipolar patterns of length ``n``, one per row."""
    if m < 1:
        raise ConfigurationError("need at least one pattern")
    return rng.integers(0, 2, size=(m, n)).astype(np.float64) * 2.0 - 1.0


def hebbian_store(patterns: np.ndarray) -> np.ndarray:
    """Hebbian weight matrix storing the given patterns.

    w_ij = sum_k z_k^i z_k^j for i != j, zero on the diagonal.  Recall is
    reliable only up to roughly 0.14 N patterns; beyond that, interference
    between stored patterns degrades retrieval.
    """
    z = np.asarray(patterns, dtype=np.float64)
    if z.ndim == 1:
        z = z[None, :]
    if z.size == 0 or z.shape[0] < 1:
        raise ConfigurationError("pattern set must contain at least one pattern")
    if not np.all(np.abs(z) == 1.0):
        raise ConfigurationError("patterns must be bipolar (-1/+1)")
    w = z.T @ z
    np.fill_diagonal(w, 0.0)
    return w
