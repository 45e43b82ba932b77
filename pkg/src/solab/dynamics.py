"""Deterministic bipolar Hopfield dynamics.

States are 1-D float arrays over {-1.0, +1.0}; couplings are symmetric
zero-diagonal square arrays.  A node update thresholds the local field

    h_i = sum_j w_ij s_j + I_i

with the convention that a field of exactly zero maps to +1.  For symmetric
zero-diagonal weights each flip changes the energy

    E = -1/2 sum_ij w_ij s_i s_j - sum_i s_i I_i

by -2 |h_i| or 0, so asynchronous relaxation descends to a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .rng import RngStream, draw_node_indices

__all__ = [
    "theta",
    "local_field",
    "async_step",
    "energy",
    "relax",
    "is_fixed_point",
    "RelaxResult",
    "check_state",
    "check_weights",
    "zero_bias",
]


def theta(x):
    """Threshold activation: -1 for negative arguments, +1 otherwise."""
    return np.where(np.asarray(x) >= 0.0, 1.0, -1.0)


def check_state(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=np.float64)
    if state.ndim != 1:
        raise DimensionMismatchError(f"state must be 1-D, got shape {state.shape}")
    if not np.all(np.abs(state) == 1.0):
        raise DimensionMismatchError("state entries must all be -1 or +1")
    return state


def check_weights(weights: np.ndarray, n: int | None = None, *, exact: bool = True) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
        raise DimensionMismatchError(f"weights must be square, got shape {weights.shape}")
    if n is not None and weights.shape[0] != n:
        raise DimensionMismatchError(
            f"weights are {weights.shape[0]}x{weights.shape[0]} but the state has length {n}"
        )
    if exact:
        if not np.array_equal(weights, weights.T):
            raise DimensionMismatchError("weights must be exactly symmetric")
        if np.any(np.diagonal(weights) != 0.0):
            raise DimensionMismatchError("weights must have a zero diagonal")
    return weights


def zero_bias(n: int) -> np.ndarray:
    return np.zeros(n, dtype=np.float64)


def _as_bias(bias, n: int) -> np.ndarray:
    if bias is None:
        return zero_bias(n)
    bias = np.asarray(bias, dtype=np.float64)
    if bias.shape != (n,):
        raise DimensionMismatchError(f"bias must have shape ({n},), got {bias.shape}")
    return bias


def local_field(state, weights, bias=None, i: int = 0) -> float:
    """Field seen by node ``i``: sum_j w_ij s_j + I_i."""
    state = check_state(state)
    n = state.size
    weights = check_weights(weights, n, exact=False)
    bias = _as_bias(bias, n)
    if not 0 <= i < n:
        raise DimensionMismatchError(f"node index {i} out of range for n={n}")
    return float(weights[i] @ state + bias[i])


def async_step(state, weights, bias=None, i: int = 0):
    """One asynchronous update of node ``i``.

    Returns ``(new_state, flipped)``; the input state is left untouched.
    """
    state = check_state(state)
    h = local_field(state, weights, bias, i)
    new = 1.0 if h >= 0.0 else -1.0
    flipped = new != state[i]
    out = state.copy()
    out[i] = new
    return out, bool(flipped)


def energy(state, weights, bias=None) -> float:
    """Quadratic energy of the configuration (lower is more relaxed)."""
    state = check_state(state)
    n = state.size
    weights = check_weights(weights, n, exact=False)
    bias = _as_bias(bias, n)
    return float(-0.5 * (state @ (weights @ state)) - state @ bias)


@dataclass
class RelaxResult:
    state: np.ndarray
    trace: np.ndarray | None
    flips: int


def relax(
    state,
    weights,
    bias=None,
    steps: int = 0,
    rng: RngStream | None = None,
    *,
    record_trace: bool = False,
) -> RelaxResult:
    """Perform exactly ``steps`` asynchronous updates at random nodes.

    The node index for each step is drawn uniformly from [0, N) with
    replacement.  ``trace`` (optional, off by default) holds the energy
    after every step, recomputed from scratch so tests can use it as an
    independent descent witness.
    """
    if steps < 1:
        raise DimensionMismatchError("steps must be >= 1")
    if rng is None:
        raise DimensionMismatchError("relax requires an explicit rng stream")
    s = check_state(state).copy()
    n = s.size
    w = check_weights(weights, n, exact=False)
    b = _as_bias(bias, n)

    idx = draw_node_indices(rng, n, steps)
    trace = np.empty(steps, dtype=np.float64) if record_trace else None
    flips = 0
    for t in range(steps):
        m = int(idx[t])
        h = float(w[m] @ s + b[m])
        new = 1.0 if h >= 0.0 else -1.0
        if new != s[m]:
            s[m] = new
            flips += 1
        if record_trace:
            trace[t] = -0.5 * (s @ (w @ s)) - s @ b
    return RelaxResult(state=s, trace=trace, flips=flips)


def is_fixed_point(state, weights, bias=None) -> bool:
    """True iff no single asynchronous update would change the state."""
    state = check_state(state)
    n = state.size
    weights = check_weights(weights, n, exact=False)
    bias = _as_bias(bias, n)
    h = weights @ state + bias
    return bool(np.all((h >= 0.0) == (state > 0.0)))
