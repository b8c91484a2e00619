"""Seeded Monte Carlo on finite chains.

The model's cluster calculus is not an i.i.d. edge process (its edge
weights sum to 1 + p*p_e), so sampling requires an explicit microscopic
convention for how the open-channel and perfect-pair resources share an
edge:

    paper_additive      categorical edge: open w.p. p, perfect pair w.p.
                        p_e, closed otherwise (requires p + p_e <= 1);
                        effective connection probability q = p + p_e.
                        Default: reproduces the model's pair connectivity
                        (p+p_e)^r, its threshold, and (through boundary-
                        prefactor cancellation) its mean cluster size.
    independent_overlap open mark ~ Bernoulli(p) and pair mark ~
                        Bernoulli(p_e) drawn independently; an edge with
                        both marks counts as open; q = p + p_e - p*p_e.
    filter_closed_only  open ~ Bernoulli(p); the filter is attempted only
                        on closed channels with success p_e;
                        q = p + (1-p)*p_e (same edge law as
                        independent_overlap, different narrative).

Chains have open boundaries; cluster size is measured in edges (an
s-cluster connects s+1 nodes).  Trials are seeded via
``seeding.derive_trial_seed`` and reduced with order-independent sums, so
a sweep is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .analytic import ModelParams
from .errors import DomainError, EstimationError
from .seeding import PRNG_NAME, derive_trial_seed, trial_generator

OPEN = kernels.OPEN
PAIR = kernels.PAIR
CLOSED = kernels.CLOSED

CONVENTIONS = ("paper_additive", "independent_overlap", "filter_closed_only")


def effective_connection_probability(params: ModelParams, convention: str) -> float:
    """Per-edge probability of being usable (open or perfect pair)."""
    p, p_e = params.p, params.p_e
    if convention == "paper_additive":
        return p + p_e
    if convention in ("independent_overlap", "filter_closed_only"):
        return p + (1.0 - p) * p_e
    raise DomainError(f"unknown convention {convention!r}; choose one of {CONVENTIONS}")


def edge_state_probabilities(params: ModelParams, convention: str) -> tuple[float, float, float]:
    """(P[open], P[pair], P[closed]) for a single edge under a convention."""
    p, p_e = params.p, params.p_e
    if convention == "paper_additive":
        if p + p_e > 1.0:
            raise DomainError(
                f"paper_additive requires p + p_e <= 1 (got {p + p_e!r}); "
                "use independent_overlap or filter_closed_only instead"
            )
        return p, p_e, 1.0 - p - p_e
    if convention in ("independent_overlap", "filter_closed_only"):
        return p, (1.0 - p) * p_e, (1.0 - p) * (1.0 - p_e)
    raise DomainError(f"unknown convention {convention!r}; choose one of {CONVENTIONS}")


@dataclass(eq=False)
class ChainSample:
    """One sampled chain: per-edge states for length_nodes-1 edges."""

    length_nodes: int
    edge_states: np.ndarray
    seed_used: int

    def __post_init__(self):
        if self.length_nodes < 2:
            raise DomainError("a chain needs at least 2 nodes")
        if len(self.edge_states) != self.length_nodes - 1:
            raise DomainError("edge_states must have length length_nodes - 1")


@dataclass(frozen=True)
class ClusterRecord:
    """One communication cluster: composition counts and position."""

    size_edges: int
    open_count: int
    pair_count: int
    start_index: int


@dataclass(frozen=True)
class Estimate:
    """A point estimate with jackknife-over-trials standard error."""

    value: float
    stderr: float


@dataclass(frozen=True)
class GTable:
    """Estimated pair connectivity g_hat(r) for r = 0..r_max."""

    r: np.ndarray
    g_hat: np.ndarray
    stderr: np.ndarray


def sample_chain(
    length_nodes: int, params: ModelParams, convention: str, seed: int
) -> ChainSample:
    """Draw one chain realization from a 64-bit seed.

    Identical (inputs, seed) always give identical samples.  The uniform
    stream layout is fixed per convention: paper_additive consumes one
    block of length_nodes-1 uniforms; the two-mark conventions consume an
    open-mark block then a pair-mark block (the pair block is drawn for
    every edge, including open ones, to keep the layout fixed).
    """
    if length_nodes < 2:
        raise DomainError("length_nodes must be >= 2")
    edge_state_probabilities(params, convention)  # validates convention and ranges
    rng = np.random.Generator(np.random.PCG64(seed))
    states = _sample_states(length_nodes, params, convention, rng)
    return ChainSample(length_nodes=length_nodes, edge_states=states, seed_used=seed)


def scan_clusters(sample: ChainSample) -> list[ClusterRecord]:
    """Decompose a chain into communication clusters (left to right)."""
    starts, lengths, open_counts = kernels.run_lengths(sample.edge_states)
    return [
        ClusterRecord(
            size_edges=int(lengths[i]),
            open_count=int(open_counts[i]),
            pair_count=int(lengths[i] - open_counts[i]),
            start_index=int(starts[i]),
        )
        for i in range(lengths.size)
    ]


def _pooled_ratio_jackknife(nums: np.ndarray, dens: np.ndarray) -> Estimate:
    """Pooled ratio sum(num)/sum(den) with leave-one-trial-out stderr."""
    nums = np.asarray(nums, dtype=np.float64)
    dens = np.asarray(dens, dtype=np.float64)
    total_num = nums.sum()
    total_den = dens.sum()
    if total_den <= 0:
        raise EstimationError("ratio denominator is zero: no qualifying data")
    value = total_num / total_den
    n = nums.size
    if n < 2:
        return Estimate(value=value, stderr=0.0)
    loo_den = total_den - dens
    if np.any(loo_den <= 0):
        return Estimate(value=value, stderr=float("nan"))
    loo = (total_num - nums) / loo_den
    var = (n - 1) / n * np.sum((loo - loo.mean()) ** 2)
    return Estimate(value=value, stderr=math.sqrt(var))


def _moment_rows(samples: Sequence[ChainSample]) -> list[dict]:
    rows = []
    for sample in samples:
        _, lengths, open_counts = kernels.run_lengths(sample.edge_states)
        rows.append(kernels.cluster_moments(lengths, open_counts))
    return rows


def estimate_mean_cluster_size(
    samples: Sequence[ChainSample],
    restrict_min_one_open: bool = True,
    size_weighted: bool = False,
) -> Estimate:
    """Mean cluster size pooled across trials.

    The default (restricted, not size-weighted) averages cluster size per
    qualifying cluster; because the model's cluster weight is proportional
    to the chain's cluster-count density for each size, this is the
    estimator whose expectation equals the closed-form mean cluster size
    under paper_additive.  ``size_weighted`` returns the next-higher
    moment ratio sum(s^2)/sum(s) (classical susceptibility-style mean,
    (1+q)/(1-q) when unrestricted).  Restriction drops clusters with no
    open edge, matching the default cluster-weight sum.
    """
    rows = _moment_rows(samples)
    key = "restricted" if restrict_min_one_open else "all"
    if size_weighted:
        nums = [r[f"s2_{key}"] for r in rows]
        dens = [r[f"s_{key}"] for r in rows]
    else:
        nums = [r[f"s_{key}"] for r in rows]
        dens = [r[f"n_{key}"] for r in rows]
    try:
        return _pooled_ratio_jackknife(np.array(nums), np.array(dens))
    except EstimationError:
        raise EstimationError(
            "no qualifying clusters in any sample"
            + (" (restricted to >= 1 open edge)" if restrict_min_one_open else "")
        ) from None


def pair_count_matrix(samples: Sequence[ChainSample], r_max: int) -> np.ndarray:
    """Per-trial connected-pair counts, shape (trials, r_max + 1)."""
    length = samples[0].length_nodes
    if r_max >= length:
        raise DomainError(f"r_max must be < length_nodes = {length}")
    out = np.zeros((len(samples), r_max + 1), dtype=np.int64)
    for t, sample in enumerate(samples):
        if sample.length_nodes != length:
            raise DomainError("all samples must share the same length_nodes")
        _, lengths, _ = kernels.run_lengths(sample.edge_states)
        out[t] = kernels.connected_pair_counts(lengths, r_max, sample.length_nodes)
    return out


def estimate_pair_connectivity(samples: Sequence[ChainSample], r_max: int) -> GTable:
    """Fraction of node pairs at each separation r joined by a cluster."""
    counts = pair_count_matrix(samples, r_max)
    length = samples[0].length_nodes
    rs = np.arange(r_max + 1)
    g_hat = np.empty(r_max + 1)
    stderr = np.empty(r_max + 1)
    for r in rs:
        den = np.full(len(samples), length - r, dtype=np.int64)
        est = _pooled_ratio_jackknife(counts[:, r], den)
        g_hat[r] = est.value
        stderr[r] = est.stderr
    return GTable(r=rs, g_hat=g_hat, stderr=stderr)


def estimate_order_parameter(samples: Sequence[ChainSample]) -> Estimate:
    """Mean fraction of edges in the largest cluster."""
    rows = _moment_rows(samples)
    largest = np.array([r["largest"] for r in rows], dtype=np.float64)
    total_edges = np.array([s.length_nodes - 1 for s in samples], dtype=np.float64)
    return _pooled_ratio_jackknife(largest / total_edges, np.ones(len(samples)))


def spanning_probability(samples: Sequence[ChainSample]) -> float:
    """Fraction of samples whose whole chain is a single cluster."""
    hits = 0
    for sample in samples:
        _, lengths, _ = kernels.run_lengths(sample.edge_states)
        if lengths.size == 1 and lengths[0] == sample.length_nodes - 1:
            hits += 1
    return hits / len(samples)


def cluster_size_histogram(
    samples: Sequence[ChainSample], s_cap: int = 2048, restrict_min_one_open: bool = True
) -> tuple[np.ndarray, np.ndarray, int]:
    """Pooled cluster-size counts: (sizes 1..s_cap, counts, overflow)."""
    total = np.zeros(s_cap + 1, dtype=np.int64)
    overflow = 0
    for sample in samples:
        _, lengths, open_counts = kernels.run_lengths(sample.edge_states)
        counts, over = kernels.size_histogram(lengths, open_counts, s_cap, restrict_min_one_open)
        total += counts
        overflow += over
    return np.arange(1, s_cap + 1), total[1:], overflow


@dataclass
class SweepRow:
    """Aggregated observables for one (p, p_e) cell of a sweep."""

    p: float
    p_e: float
    error: str | None = None
    mean_cluster_size: Estimate | None = None
    mean_cluster_size_weighted: Estimate | None = None
    order_parameter: Estimate | None = None
    spanning_fraction: float | None = None
    g_r: list[int] = field(default_factory=list)
    g_hat: list[float] = field(default_factory=list)
    g_stderr: list[float] = field(default_factory=list)
    histogram_sizes: list[int] | None = None
    histogram_counts: list[int] | None = None
    histogram_overflow: int | None = None

    def to_dict(self) -> dict:
        def est(e):
            return None if e is None else {"value": e.value, "stderr": e.stderr}

        out = {
            "p": self.p,
            "p_e": self.p_e,
            "error": self.error,
            "mean_cluster_size": est(self.mean_cluster_size),
            "mean_cluster_size_weighted": est(self.mean_cluster_size_weighted),
            "order_parameter": est(self.order_parameter),
            "spanning_fraction": self.spanning_fraction,
            "g_r": list(self.g_r),
            "g_hat": list(self.g_hat),
            "g_stderr": list(self.g_stderr),
        }
        if self.histogram_counts is not None:
            out["histogram_sizes"] = list(self.histogram_sizes)
            out["histogram_counts"] = list(self.histogram_counts)
            out["histogram_overflow"] = self.histogram_overflow
        return out


@dataclass
class SweepResult:
    """Deterministic product of run_sweep; equal inputs give equal results."""

    convention: str
    length_nodes: int
    trials: int
    master_seed: int
    r_max: int
    restrict_min_one_open: bool
    prng: str
    rows: list[SweepRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "length_nodes": self.length_nodes,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "r_max": self.r_max,
            "restrict_min_one_open": self.restrict_min_one_open,
            "prng": self.prng,
            "rows": [row.to_dict() for row in self.rows],
        }


def sweep_cell_samples(
    params: ModelParams,
    convention: str,
    length_nodes: int,
    trials: int,
    master_seed: int,
    cell_index: int = 0,
) -> list[ChainSample]:
    """The exact trial samples a sweep cell uses (for independent checks).

    Cell ``k`` of a sweep consumes trial indices k*trials .. k*trials+trials-1
    of the master seed's splitmix64 stream, so cells never share streams.
    """
    base = cell_index * trials
    return [
        sample_chain(
            length_nodes,
            params,
            convention,
            derive_trial_seed(master_seed, base + t),
        )
        for t in range(trials)
    ]


def run_sweep(
    grid: Sequence[tuple[float, float]],
    convention: str,
    length_nodes: int,
    trials: int,
    master_seed: int,
    r_max: int = 10,
    restrict_min_one_open: bool = True,
    collect_histograms: bool = False,
    s_cap: int = 2048,
) -> SweepResult:
    """Monte Carlo sweep over a grid of (p, p_e) cells.

    Per-cell domain problems (e.g. p + p_e > 1 under paper_additive) are
    recorded on the row instead of aborting the sweep.  All reductions are
    order-independent sums over per-trial integers, so rerunning with the
    same arguments reproduces the result exactly.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    result = SweepResult(
        convention=convention,
        length_nodes=length_nodes,
        trials=trials,
        master_seed=master_seed,
        r_max=r_max,
        restrict_min_one_open=restrict_min_one_open,
        prng=PRNG_NAME,
    )
    for cell_index, (p, p_e) in enumerate(grid):
        row = SweepRow(p=float(p), p_e=float(p_e))
        try:
            params = ModelParams(p=p, p_e=p_e)
            edge_state_probabilities(params, convention)
        except DomainError as exc:
            row.error = str(exc)
            result.rows.append(row)
            continue
        base = cell_index * trials
        moment_rows = []
        pair_counts = np.zeros((trials, r_max + 1), dtype=np.int64)
        span_hits = 0
        hist_total = np.zeros(s_cap + 1, dtype=np.int64)
        hist_overflow = 0
        for t in range(trials):
            rng = trial_generator(master_seed, base + t)
            sample = _sample_states(length_nodes, params, convention, rng)
            _, lengths, open_counts = kernels.run_lengths(sample)
            moment_rows.append(kernels.cluster_moments(lengths, open_counts))
            pair_counts[t] = kernels.connected_pair_counts(lengths, r_max, length_nodes)
            if lengths.size == 1 and lengths[0] == length_nodes - 1:
                span_hits += 1
            if collect_histograms:
                counts, over = kernels.size_histogram(
                    lengths, open_counts, s_cap, restrict_min_one_open
                )
                hist_total += counts
                hist_overflow += over
        key = "restricted" if restrict_min_one_open else "all"
        try:
            row.mean_cluster_size = _pooled_ratio_jackknife(
                np.array([m[f"s_{key}"] for m in moment_rows]),
                np.array([m[f"n_{key}"] for m in moment_rows]),
            )
            row.mean_cluster_size_weighted = _pooled_ratio_jackknife(
                np.array([m[f"s2_{key}"] for m in moment_rows]),
                np.array([m[f"s_{key}"] for m in moment_rows]),
            )
        except EstimationError as exc:
            row.error = str(exc)
        row.order_parameter = _pooled_ratio_jackknife(
            np.array([m["largest"] for m in moment_rows], dtype=np.float64)
            / (length_nodes - 1),
            np.ones(trials),
        )
        row.spanning_fraction = span_hits / trials
        g_hat = []
        g_stderr = []
        for r in range(r_max + 1):
            est = _pooled_ratio_jackknife(
                pair_counts[:, r], np.full(trials, length_nodes - r, dtype=np.int64)
            )
            g_hat.append(est.value)
            g_stderr.append(est.stderr)
        row.g_r = list(range(r_max + 1))
        row.g_hat = g_hat
        row.g_stderr = g_stderr
        if collect_histograms:
            row.histogram_sizes = list(range(1, s_cap + 1))
            row.histogram_counts = hist_total[1:].tolist()
            row.histogram_overflow = hist_overflow
        result.rows.append(row)
    return result


def _sample_states(
    length_nodes: int, params: ModelParams, convention: str, rng: np.random.Generator
) -> np.ndarray:
    """Edge-state array for one trial from an already-seeded generator."""
    n_edges = length_nodes - 1
    p, p_e = params.p, params.p_e
    if convention == "paper_additive":
        u = rng.random(n_edges)
        states = np.full(n_edges, CLOSED, dtype=np.uint8)
        states[u < p + p_e] = PAIR
        states[u < p] = OPEN
        return states
    u_open = rng.random(n_edges)
    u_pair = rng.random(n_edges)
    is_open = u_open < p
    is_pair = ~is_open & (u_pair < p_e)
    states = np.full(n_edges, CLOSED, dtype=np.uint8)
    states[is_pair] = PAIR
    states[is_open] = OPEN
    return states
