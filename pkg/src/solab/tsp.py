"""Traveling-salesman encoding for the network.

A tour over ``n`` cities is represented on ``N = n^2`` nodes read as an
n x n permutation matrix: row = city, column = position in the route, node
"on" meaning the city is visited at that position.  The classic quadratic
penalty energy over binary units v in {0,1},

    E = A/2 * (two "on" units in one row)
      + B/2 * (two "on" units in one column)
      + C/2 * (total "on" count - n)^2
      + D/2 * sum d_xy v_xi (v_y,i+1 + v_y,i-1)        (positions cyclic)

is converted to the bipolar network form via v = (s + 1)/2.  The conversion
produces couplings, biases and a state-independent constant; the constant
does not affect the dynamics and is dropped (``tsp_energy_offset`` recovers
it for exact cross-checks).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError

__all__ = [
    "TspInstance",
    "tsp_weights",
    "tsp_penalty_energy",
    "tsp_energy_offset",
    "encode_tour",
    "decode_tour",
    "DecodeFailure",
    "tour_length",
    "brute_force_tour",
    "random_tsp_instance",
]

# Penalty coefficients: overridable defaults, not calibrated constants.
# A, B, C follow the original optimization-mode literature.  That
# literature's distance coefficient (500) assumed graded-response units; at
# zero temperature the asynchronous dynamics then cannot fill a row/column
# slot whose cyclic neighbours are occupied (the count-penalty gain C/2 is
# smaller than the distance cost), and no valid tour is ever reached.  The
# default keeps C/2 > 2*D*d_max for distances up to ~1.
DEFAULT_A = 500.0
DEFAULT_B = 500.0
DEFAULT_C = 200.0
DEFAULT_D = 50.0


@dataclass(frozen=True)
class TspInstance:
    distances: np.ndarray
    a: float = DEFAULT_A
    b: float = DEFAULT_B
    c: float = DEFAULT_C
    d: float = DEFAULT_D

    def __post_init__(self):
        dist = np.asarray(self.distances, dtype=np.float64)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ConfigurationError(f"distance matrix must be square, got {dist.shape}")
        if dist.shape[0] < 2:
            raise ConfigurationError("need at least two cities")
        if not np.array_equal(dist, dist.T):
            raise ConfigurationError("distances must be symmetric")
        if np.any(np.diagonal(dist) != 0.0):
            raise ConfigurationError("self-distances must be zero")
        if np.any(dist < 0.0):
            raise ConfigurationError("distances must be non-negative")
        if min(self.a, self.b, self.c, self.d) <= 0.0:
            raise ConfigurationError("penalty coefficients must be positive")
        object.__setattr__(self, "distances", dist)

    @property
    def n(self) -> int:
        return self.distances.shape[0]


def random_tsp_instance(n: int, rng, **coef) -> TspInstance:
    if n < 2:
        raise ConfigurationError("need at least two cities")
    d = rng.uniform(0.1, 1.0, size=(n, n))
    d = np.triu(d, 1)
    d = d + d.T
    return TspInstance(distances=d, **coef)


def tsp_penalty_energy(inst: TspInstance, v: np.ndarray) -> float:
    """Direct evaluation of the quadratic penalty energy on binary units.

    Independent of the coupling construction below; used as its oracle.
    """
    n = inst.n
    v = np.asarray(v, dtype=np.float64).reshape(n, n)
    row = np.sum(v.sum(axis=1) ** 2 - (v**2).sum(axis=1))
    col = np.sum(v.sum(axis=0) ** 2 - (v**2).sum(axis=0))
    count = (v.sum() - n) ** 2
    nxt = np.roll(v, -1, axis=1) + np.roll(v, 1, axis=1)
    dist_term = float(np.einsum("xy,xi,yi->", inst.distances, v, nxt))
    return float(
        0.5 * inst.a * row + 0.5 * inst.b * col + 0.5 * inst.c * count + 0.5 * inst.d * dist_term
    )


def _penalty_quadratic(inst: TspInstance):
    """Penalty energy as (Q, L, K): E = 1/2 sum_{a!=b} Q v_a v_b + L.v + K."""
    n = inst.n
    eye = np.eye(n)
    ones = np.ones((n, n))
    cyc = np.zeros((n, n))
    pos = np.arange(n)
    cyc[pos, (pos + 1) % n] += 1.0
    cyc[pos, (pos - 1) % n] += 1.0

    q = inst.a * np.kron(eye, ones - eye)
    q += inst.b * np.kron(ones - eye, eye)
    q += inst.c * (np.ones((n * n, n * n)) - np.eye(n * n))
    q += inst.d * np.kron(inst.distances, cyc)
    # C/2 (sum v - n)^2 also yields v_a^2 = v_a linear parts and a constant
    lin = np.full(n * n, inst.c * (0.5 - n))
    const = 0.5 * inst.c * n * n
    return q, lin, const


def tsp_weights(inst: TspInstance):
    """Couplings and biases whose bipolar energy matches the penalty energy.

    Returns ``(weights, bias)`` over N = n^2 nodes such that
    ``energy(s, weights, bias) + tsp_energy_offset(inst)`` equals
    ``tsp_penalty_energy(inst, (s + 1) / 2)`` for every bipolar state s.
    """
    q, lin, _ = _penalty_quadratic(inst)
    w = -0.25 * q
    np.fill_diagonal(w, 0.0)
    bias = -(q.sum(axis=1) * 0.25 + lin * 0.5)
    return w, bias


def tsp_energy_offset(inst: TspInstance) -> float:
    """State-independent constant dropped by :func:`tsp_weights`."""
    q, lin, const = _penalty_quadratic(inst)
    return float(q.sum() / 8.0 + lin.sum() / 2.0 + const)


@dataclass
class DecodeFailure:
    """Names every row/column whose "on" count breaks the permutation layout."""

    bad_rows: dict = field(default_factory=dict)  # city -> on-count (!= 1)
    bad_cols: dict = field(default_factory=dict)  # position -> on-count (!= 1)

    def __str__(self):
        rows = ", ".join(f"city {x}: {c} on" for x, c in self.bad_rows.items())
        cols = ", ".join(f"position {i}: {c} on" for i, c in self.bad_cols.items())
        return f"invalid tour encoding ({rows or 'rows ok'}; {cols or 'columns ok'})"


def decode_tour(state, n: int):
    """Read an n x n permutation matrix out of a bipolar state.

    Returns the tour (list of city indices by position) when every row and
    column has exactly one "on" unit, otherwise a :class:`DecodeFailure`
    naming the violations.
    """
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (n * n,):
        raise DimensionMismatchError(f"state must have length n^2={n*n}, got {state.shape}")
    v = (state.reshape(n, n) > 0.0).astype(int)
    row_counts = v.sum(axis=1)
    col_counts = v.sum(axis=0)
    if np.all(row_counts == 1) and np.all(col_counts == 1):
        return [int(np.argmax(v[:, i])) for i in range(n)]
    return DecodeFailure(
        bad_rows={int(x): int(c) for x, c in enumerate(row_counts) if c != 1},
        bad_cols={int(i): int(c) for i, c in enumerate(col_counts) if c != 1},
    )


def encode_tour(tour, n: int) -> np.ndarray:
    """Bipolar state for a tour (inverse of :func:`decode_tour`)."""
    if sorted(tour) != list(range(n)):
        raise ConfigurationError(f"tour must be a permutation of 0..{n-1}, got {tour}")
    v = np.full((n, n), -1.0)
    for i, x in enumerate(tour):
        v[x, i] = 1.0
    return v.reshape(-1)


def tour_length(tour, distances) -> float:
    """Cyclic tour length (returns to the starting city)."""
    d = np.asarray(distances, dtype=np.float64)
    n = len(tour)
    if sorted(tour) != list(range(n)):
        raise ConfigurationError(f"tour must be a permutation of 0..{n-1}, got {tour}")
    return float(sum(d[tour[i], tour[(i + 1) % n]] for i in range(n)))


def brute_force_tour(distances) -> tuple[list, float]:
    """Exhaustive shortest cyclic tour; first city pinned to cut symmetry."""
    d = np.asarray(distances, dtype=np.float64)
    n = d.shape[0]
    best, best_len = None, np.inf
    for rest in permutations(range(1, n)):
        tour = [0, *rest]
        length = tour_length(tour, d)
        if length < best_len:
            best, best_len = tour, length
    return best, float(best_len)
