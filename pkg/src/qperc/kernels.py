"""Kernel backend selection and run-derived statistics.

The only backend-differentiated primitive is ``run_lengths`` (the hot
per-trial scan).  The backend is chosen once at import from the
``QPERC_KERNEL_BACKEND`` environment variable:

    auto   (default) numba when importable, else pure numpy
    numba  require the compiled backend (ImportError if missing)
    numpy  force the pure-numpy fallback

Both backends return identical arrays, and every statistic below is exact
integer arithmetic on them, so results are backend-invariant bit for bit.
``get_backend`` exposes both for tests and the benchmark.
"""

from __future__ import annotations

import os

import numpy as np

from ._kernels_numpy import CLOSED, OPEN, PAIR  # noqa: F401  (canonical state codes)
from ._kernels_numpy import run_lengths as _run_lengths_numpy

_BACKENDS = ("auto", "numba", "numpy")


def _load_numba_backend():
    from . import _kernels_numba

    return _kernels_numba.run_lengths


def _select_backend() -> tuple[str, object]:
    choice = os.environ.get("QPERC_KERNEL_BACKEND", "auto").strip().lower()
    if choice not in _BACKENDS:
        raise ValueError(
            f"QPERC_KERNEL_BACKEND must be one of {_BACKENDS}, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", _run_lengths_numpy
    try:
        fn = _load_numba_backend()
        return "numba", fn
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", _run_lengths_numpy


_BACKEND_NAME, run_lengths = _select_backend()


def active_backend() -> str:
    """Name of the backend selected at import ('numba' or 'numpy')."""
    return _BACKEND_NAME


def get_backend(name: str):
    """Fetch a specific backend's run_lengths (for tests/benchmarks)."""
    if name == "numpy":
        return _run_lengths_numpy
    if name == "numba":
        return _load_numba_backend()
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["numpy"]
    try:
        _load_numba_backend()
        names.insert(0, "numba")
    except ImportError:
        pass
    return names


def cluster_moments(lengths: np.ndarray, open_counts: np.ndarray) -> dict:
    """Integer cluster statistics for one chain.

    Returns counts and first/second size moments for all clusters and for
    the restricted set (at least one open edge), plus the largest cluster
    size.  All values are Python ints (exact, order-independent).
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    restricted = open_counts > 0
    lr = lengths[restricted]
    return {
        "n_all": int(lengths.size),
        "s_all": int(lengths.sum()),
        "s2_all": int((lengths * lengths).sum()),
        "n_restricted": int(lr.size),
        "s_restricted": int(lr.sum()),
        "s2_restricted": int((lr * lr).sum()),
        "largest": int(lengths.max()) if lengths.size else 0,
    }


def connected_pair_counts(lengths: np.ndarray, r_max: int, n_nodes: int) -> np.ndarray:
    """Counts of node pairs at separation r joined by a cluster, r = 0..r_max.

    A run of m edges contributes max(0, m - r + 1) connected pairs at
    separation r; separation 0 counts every node once.  Computed from the
    run-length histogram with suffix sums (exact integers).
    """
    counts = np.zeros(r_max + 1, dtype=np.int64)
    counts[0] = n_nodes
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.size == 0 or r_max == 0:
        return counts
    hist = np.bincount(lengths)
    m = np.arange(hist.size, dtype=np.int64)
    suffix_n = np.cumsum(hist[::-1])[::-1]  # sum_{k>=m} hist[k]
    suffix_s = np.cumsum((m * hist)[::-1])[::-1]  # sum_{k>=m} k*hist[k]
    top = min(r_max, hist.size - 1)
    r = np.arange(1, top + 1, dtype=np.int64)
    counts[1 : top + 1] = suffix_s[r] - (r - 1) * suffix_n[r]
    return counts


def size_histogram(
    lengths: np.ndarray, open_counts: np.ndarray, s_cap: int, restricted: bool = True
) -> tuple[np.ndarray, int]:
    """Histogram of cluster sizes 1..s_cap plus an overflow count."""
    lengths = np.asarray(lengths, dtype=np.int64)
    if restricted:
        lengths = lengths[np.asarray(open_counts) > 0]
    counts = np.zeros(s_cap + 1, dtype=np.int64)
    if lengths.size == 0:
        return counts, 0
    overflow = int((lengths > s_cap).sum())
    inside = lengths[lengths <= s_cap]
    counts[: s_cap + 1] = np.bincount(inside, minlength=s_cap + 1)[: s_cap + 1]
    return counts, overflow
