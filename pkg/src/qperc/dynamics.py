"""Percolation-strength trajectories under a channel-opening schedule.

Time enters only through a monotone schedule of the occupation
probability p; filtering is a boolean gate.  With the gate always on the
strength rises continuously from zero at p_c = 1 - p_e.  Delaying the
gate keeps the strength at zero (a 1D chain cannot percolate classically
below p = 1) and releasing it above threshold produces an instantaneous
upward jump — an operational effect of withholding a resource, not an
explosive-percolation mechanism (no abnormal cluster growth is involved).

A trajectory point at the release step records the post-release value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import ModelParams, percolation_strength_closed
from .errors import DomainError

__all__ = [
    "Schedule",
    "TrajectoryPoint",
    "linear_ramp",
    "continuous_trajectory",
    "delayed_trajectory",
    "jump_magnitude",
]


@dataclass(frozen=True)
class Schedule:
    """A monotone nondecreasing sequence of occupation probabilities."""

    p_of_t: tuple[float, ...]

    def __post_init__(self):
        if len(self.p_of_t) < 2:
            raise DomainError("a schedule needs at least 2 steps")
        ps = self.p_of_t
        if min(ps) < 0.0 or max(ps) > 1.0:
            raise DomainError("schedule values must lie in [0, 1]")
        if any(b < a for a, b in zip(ps, ps[1:])):
            raise DomainError("schedule must be monotone nondecreasing")

    @property
    def steps(self) -> int:
        return len(self.p_of_t)


def linear_ramp(steps: int) -> Schedule:
    """Default schedule: p ramps linearly from 0 to 1 over `steps` points."""
    if steps < 2:
        raise DomainError("steps must be >= 2")
    return Schedule(p_of_t=tuple(float(x) for x in np.linspace(0.0, 1.0, steps)))


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    p: float
    filtering_active: bool
    strength: float


def _strength(p: float, p_e: float) -> float:
    return percolation_strength_closed(ModelParams(p=p, p_e=p_e)).strength_p


def continuous_trajectory(schedule: Schedule, p_e: float) -> list[TrajectoryPoint]:
    """Strength along the schedule with filtering active throughout."""
    return [
        TrajectoryPoint(step=t, p=p, filtering_active=True, strength=_strength(p, p_e))
        for t, p in enumerate(schedule.p_of_t)
    ]


def delayed_trajectory(
    schedule: Schedule, p_e: float, release_step: int
) -> list[TrajectoryPoint]:
    """Strength with filtering withheld until ``release_step``.

    Before release the chain is purely classical, so the strength is 0
    for p < 1 (and 1 in the degenerate all-open case p = 1).  From the
    release step on, the strength follows the closed form with full p_e.
    """
    if not 0 <= release_step < schedule.steps:
        raise DomainError(
            f"release_step must lie in [0, {schedule.steps - 1}], got {release_step}"
        )
    points = []
    for t, p in enumerate(schedule.p_of_t):
        if t < release_step:
            strength = 1.0 if p == 1.0 else 0.0
            points.append(
                TrajectoryPoint(step=t, p=p, filtering_active=False, strength=strength)
            )
        else:
            points.append(
                TrajectoryPoint(
                    step=t, p=p, filtering_active=True, strength=_strength(p, p_e)
                )
            )
    return points


def jump_magnitude(p_at_release: float, p_e: float) -> float:
    """Strength acquired instantaneously when filtering is released."""
    return _strength(p_at_release, p_e)


def max_step_increment(points: Sequence[TrajectoryPoint]) -> tuple[int, float]:
    """(step, increment) of the largest single-step strength increase."""
    best_step, best = 0, 0.0
    for prev, cur in zip(points, points[1:]):
        inc = cur.strength - prev.strength
        if inc > best:
            best, best_step = inc, cur.step
    return best_step, best
