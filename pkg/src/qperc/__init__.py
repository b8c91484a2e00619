"""qperc: hybrid classical/quantum percolation on 1D chains.

Closed-form theory (qperc.analytic), seeded Monte Carlo under explicit
edge-state conventions (qperc.mc) with an exhaustive-enumeration oracle
(qperc.exact), strength trajectories under delayed filtering
(qperc.dynamics), exponent fits and the analytic-vs-MC comparison
(qperc.analysis), and a deterministic CLI (qperc.cli).
"""

from .analytic import (
    ExponentSet,
    ModelParams,
    StrengthSolution,
    classical_spanning_probability,
    cluster_number,
    cluster_weight,
    correlation_length,
    characteristic_cluster_size,
    critical_occupation,
    declared_exponents,
    filtering_probability,
    mean_cluster_size,
    mean_cluster_size_series,
    pair_connectivity,
    percolation_strength_closed,
    percolation_strength_fixed_point,
    scaling_law_audit,
)
from .dynamics import (
    Schedule,
    TrajectoryPoint,
    continuous_trajectory,
    delayed_trajectory,
    jump_magnitude,
    linear_ramp,
)
from .exact import ExactObservables, enumerate_exact
from .mc import (
    CONVENTIONS,
    ChainSample,
    ClusterRecord,
    Estimate,
    SweepResult,
    estimate_mean_cluster_size,
    estimate_order_parameter,
    estimate_pair_connectivity,
    run_sweep,
    sample_chain,
    scan_clusters,
    spanning_probability,
)
from .seeding import derive_trial_seed

__version__ = "0.1.0"
