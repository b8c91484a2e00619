"""Numba-accelerated kernel backend.

Single compiled pass over the edge-state array.  Output contract is
identical to the numpy backend (same arrays, same dtypes, same order).
"""

from __future__ import annotations

import numpy as np
from numba import njit

OPEN = 0
PAIR = 1
CLOSED = 2


@njit(cache=True)
def _run_lengths_impl(states):
    n = states.shape[0]
    max_runs = n // 2 + 1
    starts = np.empty(max_runs, dtype=np.int64)
    lengths = np.empty(max_runs, dtype=np.int64)
    open_counts = np.empty(max_runs, dtype=np.int64)
    n_runs = 0
    i = 0
    while i < n:
        if states[i] != CLOSED:
            start = i
            n_open = 0
            while i < n and states[i] != CLOSED:
                if states[i] == OPEN:
                    n_open += 1
                i += 1
            starts[n_runs] = start
            lengths[n_runs] = i - start
            open_counts[n_runs] = n_open
            n_runs += 1
        else:
            i += 1
    return starts[:n_runs].copy(), lengths[:n_runs].copy(), open_counts[:n_runs].copy()


def run_lengths(states: np.ndarray):
    """Maximal runs of non-closed edges; see the numpy backend docstring."""
    return _run_lengths_impl(np.ascontiguousarray(states, dtype=np.uint8))
