"""Pure-numpy kernel backend.

Run-length extraction via vectorized diff/flatnonzero; used when numba is
unavailable or when QPERC_KERNEL_BACKEND=numpy.  Must produce results
bit-identical to the numba backend (everything downstream is integer
arithmetic on the run arrays).
"""

from __future__ import annotations

import numpy as np

OPEN = 0
PAIR = 1
CLOSED = 2


def run_lengths(states: np.ndarray):
    """Maximal runs of non-closed edges.

    Returns (starts, lengths, open_counts) as int64 arrays, one entry per
    communication cluster, in left-to-right order.
    """
    states = np.asarray(states, dtype=np.uint8)
    connected = states != CLOSED
    padded = np.empty(connected.size + 2, dtype=np.int8)
    padded[0] = 0
    padded[-1] = 0
    padded[1:-1] = connected
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1).astype(np.int64)
    ends = np.flatnonzero(d == -1).astype(np.int64)
    lengths = ends - starts
    open_cumsum = np.concatenate(
        [np.zeros(1, dtype=np.int64), np.cumsum(states == OPEN, dtype=np.int64)]
    )
    open_counts = open_cumsum[ends] - open_cumsum[starts]
    return starts, lengths, open_counts
