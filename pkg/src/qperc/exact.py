"""Exhaustive enumeration oracle for short chains.

Walks every edge-state configuration of a chain, weights it by its exact
probability under the chosen convention, and accumulates the same
observables the Monte Carlo estimators target.  Written independently of
the kernel backends (its own scanner, plain Python) so it can vouch for
them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .analytic import ModelParams
from .errors import SizeGuardError
from .mc import CLOSED, OPEN, PAIR, edge_state_probabilities

MAX_NODES = 12


@dataclass(frozen=True)
class ExactObservables:
    """Exact expectations matching the pooled Monte Carlo estimators.

    Mean-cluster-size fields are ratios of expectations (the limit of the
    pooled estimators); a field is NaN when its denominator vanishes.
    """

    mean_cluster_size: float
    mean_cluster_size_weighted: float
    mean_cluster_size_unrestricted: float
    mean_cluster_size_unrestricted_weighted: float
    order_parameter: float
    spanning_probability: float


def _scan_runs(states: tuple[int, ...]) -> list[tuple[int, int]]:
    """(size, open_count) per maximal run of non-closed edges."""
    runs = []
    size = 0
    n_open = 0
    for s in states:
        if s == CLOSED:
            if size:
                runs.append((size, n_open))
            size = 0
            n_open = 0
        else:
            size += 1
            if s == OPEN:
                n_open += 1
    if size:
        runs.append((size, n_open))
    return runs


def enumerate_exact(
    length_nodes: int, params: ModelParams, convention: str
) -> ExactObservables:
    """Exact observables by summing over all 3^(length_nodes-1) configurations."""
    if length_nodes < 2 or length_nodes > MAX_NODES:
        raise SizeGuardError(
            f"enumeration supports 2 <= length_nodes <= {MAX_NODES}, got {length_nodes}"
        )
    probs = edge_state_probabilities(params, convention)
    n_edges = length_nodes - 1
    acc = {
        "n_res": 0.0,
        "s_res": 0.0,
        "s2_res": 0.0,
        "n_all": 0.0,
        "s_all": 0.0,
        "s2_all": 0.0,
        "largest": 0.0,
        "span": 0.0,
    }
    for states in itertools.product((OPEN, PAIR, CLOSED), repeat=n_edges):
        weight = 1.0
        for s in states:
            weight *= probs[s]
        if weight == 0.0:
            continue
        runs = _scan_runs(states)
        largest = 0
        for size, n_open in runs:
            largest = max(largest, size)
            acc["n_all"] += weight
            acc["s_all"] += weight * size
            acc["s2_all"] += weight * size * size
            if n_open > 0:
                acc["n_res"] += weight
                acc["s_res"] += weight * size
                acc["s2_res"] += weight * size * size
        acc["largest"] += weight * largest
        if len(runs) == 1 and runs[0][0] == n_edges:
            acc["span"] += weight

    def ratio(num, den):
        return num / den if den > 0 else float("nan")

    return ExactObservables(
        mean_cluster_size=ratio(acc["s_res"], acc["n_res"]),
        mean_cluster_size_weighted=ratio(acc["s2_res"], acc["s_res"]),
        mean_cluster_size_unrestricted=ratio(acc["s_all"], acc["n_all"]),
        mean_cluster_size_unrestricted_weighted=ratio(acc["s2_all"], acc["s_all"]),
        order_parameter=acc["largest"] / n_edges,
        spanning_probability=acc["span"],
    )
