"""Closed-form theory of the hybrid 1D chain.

A channel between neighboring nodes is open for classical communication
with probability ``p``; an imperfect entangled pair on the same link can
be upgraded to a perfect one with probability ``p_e = 2*tau*(1-tau)``
(Schmidt weight ``tau``).  Everything here is a pure function of the pair
``(p, p_e)``: cluster weights, the mean cluster size and its divergence at
``p_c = 1 - p_e``, pair connectivity and correlation length, the
percolation strength from the two-equation self-consistency system, the
declared critical exponents, and the scaling-law audit.

Conventions used throughout: ``a = p + p_e`` (effective connection
probability of an edge), ``b = p_e``.  The default cluster-weight sum
starts at one open channel per cluster (``i0 = 1``); ``include_zero_open``
restores the ``i0 = 0`` variant that also counts all-entanglement
clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConvergenceError, DivergenceError, DomainError

__all__ = [
    "ModelParams",
    "ExponentSet",
    "StrengthSolution",
    "ScalingLawAudit",
    "ScalingRelation",
    "SeriesValue",
    "filtering_probability",
    "critical_occupation",
    "cluster_weight",
    "cluster_number",
    "mean_cluster_size",
    "mean_cluster_size_series",
    "pair_connectivity",
    "correlation_length",
    "characteristic_cluster_size",
    "percolation_strength_closed",
    "percolation_strength_fixed_point",
    "declared_exponents",
    "scaling_law_audit",
    "classical_spanning_probability",
]


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def filtering_probability(tau: float) -> float:
    """Success probability of upgrading an imperfect pair: 2*tau*(1-tau).

    Symmetric in tau <-> 1-tau and never exceeds 1/2 (maximum at
    tau = 1/2, the maximally entangled state).
    """
    tau = _check_probability("tau", tau)
    return 2.0 * tau * (1.0 - tau)


def critical_occupation(p_e: float) -> float:
    """Percolation threshold p_c = 1 - p_e."""
    p_e = _check_probability("p_e", p_e)
    return 1.0 - p_e


@dataclass(frozen=True)
class ModelParams:
    """The channel-open probability ``p`` and filter success ``p_e``.

    Exactly one of ``p_e`` / ``tau_schmidt`` must be supplied; when
    ``tau_schmidt`` is given, ``p_e`` is derived as ``2*tau*(1-tau)``
    (so it never exceeds 1/2).
    """

    p: float
    p_e: float | None = None
    tau_schmidt: float | None = None

    def __post_init__(self):
        _check_probability("p", self.p)
        if self.tau_schmidt is not None:
            derived = filtering_probability(self.tau_schmidt)
            if self.p_e is not None and self.p_e != derived:
                raise DomainError(
                    f"p_e={self.p_e!r} conflicts with tau_schmidt={self.tau_schmidt!r} "
                    f"(implies p_e={derived!r})"
                )
            object.__setattr__(self, "p_e", derived)
        if self.p_e is None:
            raise DomainError("one of p_e or tau_schmidt is required")
        _check_probability("p_e", self.p_e)

    @property
    def q(self) -> float:
        """Effective edge-connection probability p + p_e (additive reading)."""
        return self.p + self.p_e

    @property
    def p_c(self) -> float:
        return critical_occupation(self.p_e)


@dataclass(frozen=True)
class ExponentSet:
    """Critical exponents; the declared model values are {1, 1, 1, 2, 1}."""

    gamma: float
    sigma: float
    nu: float
    tau_fisher: float
    beta: float


def declared_exponents() -> ExponentSet:
    """The exponents the model asserts: gamma=sigma=nu=beta=1, tau_fisher=2."""
    return ExponentSet(gamma=1.0, sigma=1.0, nu=1.0, tau_fisher=2.0, beta=1.0)


def cluster_weight(s: int, params: ModelParams, include_zero_open: bool = False) -> float:
    """Probability weight of an s-edge communication cluster.

    Closed form of the binomial sum over compositions (i open channels,
    s-i perfect pairs, i >= 1 by default):

        [(p+p_e)^s - p_e^s] * (1-p)^2 * (1-p_e)^2

    With ``include_zero_open`` the subtracted all-pairs term is kept,
    giving (p+p_e)^s * (1-p)^2 * (1-p_e)^2.
    """
    if s < 1 or int(s) != s:
        raise DomainError(f"cluster size must be an integer >= 1, got {s!r}")
    s = int(s)
    p, p_e = params.p, params.p_e
    boundary = (1.0 - p) ** 2 * (1.0 - p_e) ** 2
    a = p + p_e
    total = a**s if include_zero_open else a**s - p_e**s
    return total * boundary


def cluster_number(s: int, params: ModelParams, include_zero_open: bool = False) -> float:
    """Cluster number n_s = cluster_weight(s) / s (per-edge density)."""
    return cluster_weight(s, params, include_zero_open) / int(s)


def _geom_first(x: float) -> float:
    # sum_{s>=1} x^s = x/(1-x)
    return x / (1.0 - x)


def _geom_s(x: float) -> float:
    # sum_{s>=1} s x^s = x/(1-x)^2
    return x / (1.0 - x) ** 2


def _geom_s2(x: float) -> float:
    # sum_{s>=1} s^2 x^s = x(1+x)/(1-x)^3
    return x * (1.0 + x) / (1.0 - x) ** 3


def mean_cluster_size(
    params: ModelParams,
    include_zero_open: bool = False,
    size_weighted: bool = False,
) -> float:
    """Mean communication-cluster size below threshold (closed form).

    Default is the model's own ratio sum_s s*w_s / sum_s w_s with
    w_s = cluster_weight(s); it diverges like (p_c - p)^-1 at
    p_c = 1 - p_e.  ``size_weighted`` instead weights each cluster by its
    size (ratio of the next-higher moments), which reduces to the
    classical (1+p)/(1-p) when p_e = 0.
    """
    a, b = params.q, params.p_e
    if a >= 1.0:
        raise DivergenceError(
            f"mean cluster size diverges for p + p_e >= 1 (threshold p_c = {params.p_c!r})"
        )
    if include_zero_open:
        num_lo, den_lo = _geom_s(a), _geom_first(a)
        num_hi = _geom_s2(a)
    else:
        num_lo = _geom_s(a) - _geom_s(b)
        den_lo = _geom_first(a) - _geom_first(b)
        num_hi = _geom_s2(a) - _geom_s2(b)
    if den_lo <= 0.0:
        raise DomainError("cluster weights vanish identically (p = 0 with i0 = 1 and p_e = 0)")
    if size_weighted:
        return num_hi / num_lo
    return num_lo / den_lo


@dataclass(frozen=True)
class SeriesValue:
    """A truncated-series evaluation plus a rigorous remainder bound."""

    value: float
    s_max: int
    truncation_bound: float


def _tail_s(x: float, m: int) -> float:
    # sum_{s>m} s x^s = x^(m+1) * ((m+1)(1-x) + x) / (1-x)^2
    return x ** (m + 1) * ((m + 1) * (1.0 - x) + x) / (1.0 - x) ** 2


def _tail_first(x: float, m: int) -> float:
    # sum_{s>m} x^s = x^(m+1)/(1-x)
    return x ** (m + 1) / (1.0 - x)


def mean_cluster_size_series(
    params: ModelParams,
    s_max: int,
    include_zero_open: bool = False,
    size_weighted: bool = False,
) -> SeriesValue:
    """Mean cluster size by direct summation of the defining ratio to s_max.

    The reported truncation bound is the exact geometric-tail bound on
    |series - closed form| (numerator and denominator remainders combined
    through the ratio), so the series value is always within it.
    """
    if s_max < 1:
        raise DomainError("s_max must be >= 1")
    a = params.q
    if a >= 1.0:
        raise DivergenceError("series diverges for p + p_e >= 1")
    num = 0.0
    den = 0.0
    for s in range(1, s_max + 1):
        w = cluster_weight(s, params, include_zero_open)
        if size_weighted:
            num += s * s * w
            den += s * w
        else:
            num += s * w
            den += w
    if den <= 0.0:
        raise DomainError("cluster weights vanish identically over the summed range")
    value = num / den
    boundary = (1.0 - params.p) ** 2 * (1.0 - params.p_e) ** 2
    # Remainder bounds for the numerator/denominator sums; the b-part of
    # w_s only shrinks both, so bounding by the a-part alone is valid.
    if size_weighted:
        # sum s^2 x^s tail <= (m+1) * tail_s for x<1 is loose; use exact form.
        x = a
        m = s_max
        tail_num = boundary * (
            x ** (m + 1)
            * ((m + 1) ** 2 * (1 - x) ** 2 + x * (2 * (m + 1) * (1 - x) + 1 + x))
            / (1 - x) ** 3
        )
        tail_den = boundary * _tail_s(x, m)
    else:
        tail_num = boundary * _tail_s(a, s_max)
        tail_den = boundary * _tail_first(a, s_max)
    bound = (tail_num + value * tail_den) / den
    return SeriesValue(value=value, s_max=s_max, truncation_bound=bound)


def pair_connectivity(r: int, params: ModelParams) -> float:
    """Probability two nodes r apart share a cluster: (p + p_e)^r."""
    if r < 0 or int(r) != r:
        raise DomainError(f"separation must be an integer >= 0, got {r!r}")
    a = params.q
    if a > 1.0:
        raise DomainError(
            f"p + p_e = {a!r} > 1 is outside the additive reading; this quantity is undefined"
        )
    return a ** int(r)


def correlation_length(params: ModelParams) -> float:
    """Decay length of the pair connectivity: -1/ln(p + p_e).

    Near threshold this behaves as (p_c - p)^-1.
    """
    a = params.q
    if a <= 0.0 or a >= 1.0:
        raise DomainError(
            f"correlation length requires 0 < p + p_e < 1, got {a!r} (zero or infinite length)"
        )
    return -1.0 / math.log(a)


def characteristic_cluster_size(params: ModelParams) -> float:
    """Cutoff of the geometric cluster-weight decay: -1/ln(p + p_e).

    Numerically identical to correlation_length; exposed separately
    because it parameterizes the cluster-size-distribution cutoff and the
    sigma estimator.
    """
    return correlation_length(params)


@dataclass(frozen=True)
class StrengthSolution:
    """Solution of the percolation-strength self-consistency system.

    ``q_open``/``q_pair`` are the no-connection probabilities for an open
    channel and a perfect pair, ``product_x`` their product, and
    ``strength_p = max(0, 1 - product_x^2)``.  ``root_used`` records
    whether the trivial X = 1 root (no giant component) or the physical
    root below 1 was selected.
    """

    q_open: float
    q_pair: float
    product_x: float
    strength_p: float
    root_used: str
    iterations: int | None = None


def percolation_strength_closed(params: ModelParams) -> StrengthSolution:
    """Percolation strength P = 1 - Q^2 Q_e^2 from the closed-form root.

    The self-consistency quadratic always has the root X = Q*Q_e = 1; the
    other root is X = (1-p)(1-p_e)/(p*p_e).  The physical branch is
    min(1, X), which makes P = 0 at and below p_c = 1 - p_e and keeps P
    continuous through the transition.  When p*p_e = 0 the trivial root is
    the only solution and P = 0.
    """
    p, p_e = params.p, params.p_e
    if p * p_e == 0.0:
        return StrengthSolution(
            q_open=1.0, q_pair=1.0, product_x=1.0, strength_p=0.0, root_used="trivial_unit"
        )
    x_physical = ((1.0 - p) * (1.0 - p_e)) / (p * p_e)
    if x_physical >= 1.0:
        return StrengthSolution(
            q_open=1.0, q_pair=1.0, product_x=1.0, strength_p=0.0, root_used="trivial_unit"
        )
    q_open = (1.0 - p) + p * x_physical
    q_pair = (1.0 - p_e) + p_e * x_physical
    strength = max(0.0, 1.0 - x_physical * x_physical)
    return StrengthSolution(
        q_open=q_open,
        q_pair=q_pair,
        product_x=x_physical,
        strength_p=strength,
        root_used="physical",
    )


def percolation_strength_fixed_point(
    params: ModelParams,
    tolerance: float = 1e-12,
    max_iterations: int = 1_000_000,
) -> StrengthSolution:
    """Solve Q = (1-p) + p*Q*Q_e, Q_e = (1-p_e) + p_e*Q*Q_e iteratively.

    Multiplying the two equations reduces the system exactly to a single
    update for the complement e = 1 - Q*Q_e:

        e' = (p+p_e)*e - p*p_e*e^2,  so the residual is e*((q-1) - c*e)
        with q = p+p_e, c = p*p_e.

    The residual in that form has no catastrophic cancellation, so the
    solver takes damped Newton steps on it (the raw Picard map slows down
    critically at q = 1, where the two roots of the quadratic merge, and
    difference-based acceleration bottoms out near sqrt(eps)/c there).
    Starting from e0 = 1 - (1-p)(1-p_e), the iterates decrease
    monotonically to the physical root.  Stops once the change of the
    product between successive iterates falls below ``tolerance``.
    """
    if tolerance <= 0.0:
        raise DomainError("tolerance must be positive")
    p, p_e = params.p, params.p_e
    q = p + p_e
    c = p * p_e
    if c == 0.0:
        # Degenerate linear system; follow the closed form's convention
        # (no giant component without both resources).
        return StrengthSolution(
            q_open=1.0, q_pair=1.0, product_x=1.0, strength_p=0.0,
            root_used="trivial_unit", iterations=0,
        )
    k = q - 1.0
    e = q - c  # complement of the starting product (1-p)(1-p_e)
    iterations = 0
    converged = e == 0.0
    while not converged and iterations < max_iterations:
        f = e * (k - c * e)
        if f == 0.0:
            converged = True
            break
        df = k - 2.0 * c * e
        e_next = e - f / df
        if e_next < 0.0:
            e_next = 0.0
        iterations += 1
        change = abs(e_next - e)
        e = e_next
        if change <= tolerance:
            converged = True
    if not converged:
        raise ConvergenceError(
            f"fixed point not converged after {iterations} iterations "
            f"(p={p!r}, p_e={p_e!r}, last product change above {tolerance!r})",
            last_iterate=1.0 - e,
        )
    e = max(0.0, e)
    x = 1.0 - e
    q_open = (1.0 - p) + p * x
    q_pair = (1.0 - p_e) + p_e * x
    strength = max(0.0, 1.0 - x * x)
    root = "trivial_unit" if x >= 1.0 else "physical"
    return StrengthSolution(
        q_open=q_open,
        q_pair=q_pair,
        product_x=x,
        strength_p=strength,
        root_used=root,
        iterations=iterations,
    )


def strength_root_residual(params: ModelParams, x: float = 1.0) -> float:
    """Residual of the self-consistency quadratic at ``x``.

    p*p_e*x^2 + (p + p_e - 2*p*p_e - 1)*x + (1-p)(1-p_e); the value at
    x = 1 is identically zero for every parameter pair.
    """
    p, p_e = params.p, params.p_e
    return p * p_e * x * x + (p + p_e - 2.0 * p * p_e - 1.0) * x + (1.0 - p) * (1.0 - p_e)


@dataclass(frozen=True)
class ScalingRelation:
    relation: str
    left: float
    right: float
    holds: bool
    tolerance: float


@dataclass(frozen=True)
class ScalingLawAudit:
    """Pass/fail record for the classical exponent relations."""

    relations: list[ScalingRelation] = field(default_factory=list)

    def violated(self) -> list[ScalingRelation]:
        return [r for r in self.relations if not r.holds]


def scaling_law_audit(
    exponents: ExponentSet, dimension: int = 1, tolerance: float = 1e-9
) -> ScalingLawAudit:
    """Check the classical scaling laws against an exponent set.

    Relations audited: beta = (tau-2)/sigma, gamma = (3-tau)/sigma and
    d*nu = (tau-1)/sigma.  For the declared model exponents the first is
    violated (1 vs 0) while the other two hold, which is the model's
    departure from classical percolation.
    """
    if exponents.sigma == 0:
        raise DomainError("sigma must be nonzero for the scaling relations")
    tau_f, sigma = exponents.tau_fisher, exponents.sigma
    checks = [
        ("beta = (tau-2)/sigma", exponents.beta, (tau_f - 2.0) / sigma),
        ("gamma = (3-tau)/sigma", exponents.gamma, (3.0 - tau_f) / sigma),
        ("d*nu = (tau-1)/sigma", dimension * exponents.nu, (tau_f - 1.0) / sigma),
    ]
    relations = [
        ScalingRelation(name, left, right, abs(left - right) <= tolerance, tolerance)
        for name, left, right in checks
    ]
    return ScalingLawAudit(relations=relations)


def classical_spanning_probability(p: float, n: int) -> float:
    """Probability that n consecutive channels are all open: p^n."""
    p = _check_probability("p", p)
    if n < 0 or int(n) != n:
        raise DomainError(f"channel count must be an integer >= 0, got {n!r}")
    return p ** int(n)
