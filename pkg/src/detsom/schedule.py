"""Time-decay schedules: neighborhood radius, learning rate, and neighbor influence.

All three decays share one logarithmic base ``b > 1`` and are anchored to the
run's epoch budget so that the radius lands on 1 exactly when the budget is
exhausted. Epochs are whole passes over the training set; decay values are
constant within an epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "DecaySchedule",
    "initial_radius",
    "radius_at",
    "learning_rate_at",
    "influence",
]


@dataclass(frozen=True)
class DecaySchedule:
    """Precomputed decay constants for one training run.

    The radius decays as ``radius0 * base**(-t / lambda_radius)`` with
    ``lambda_radius = max_epochs / log_base(radius0)``, which forces
    ``R(max_epochs) == 1``. The learning rate decays with time constant
    ``max_epochs`` itself, so ``L(max_epochs) == rate0 / base``.

    A starting radius of 1 or less has no meaningful time constant (its
    decay target is already met); the radius is then held constant at
    ``radius0`` for the whole run and ``lambda_radius`` is ``None``.
    """

    radius0: float
    rate0: float
    max_epochs: int
    base: float = math.e
    lambda_radius: float | None = field(init=False)
    lambda_rate: float = field(init=False)

    def __post_init__(self) -> None:
        if self.radius0 <= 0.0:
            raise ValueError(f"radius0 must be positive, got {self.radius0}")
        if not 0.0 < self.rate0 <= 1.0:
            raise ValueError(f"rate0 must be in (0, 1], got {self.rate0}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.base <= 1.0:
            raise ValueError(f"base must be > 1, got {self.base}")
        if self.radius0 > 1.0:
            lam = self.max_epochs / math.log(self.radius0, self.base)
        else:
            lam = None
        object.__setattr__(self, "lambda_radius", lam)
        object.__setattr__(self, "lambda_rate", float(self.max_epochs))


def initial_radius(rows: int, cols: int) -> float:
    """Starting neighborhood radius: half of the smallest map dimension."""
    if rows < 1 or cols < 1:
        raise ValueError(f"map dimensions must be >= 1, got {rows}x{cols}")
    return min(rows, cols) / 2.0


def _check_epoch(t: int, schedule: DecaySchedule) -> None:
    if not 0 <= t <= schedule.max_epochs:
        raise ValueError(
            f"epoch {t} outside schedule range [0, {schedule.max_epochs}]"
        )


def radius_at(t: int, schedule: DecaySchedule) -> float:
    """Neighborhood radius at epoch ``t``; decays from radius0 to 1."""
    _check_epoch(t, schedule)
    if schedule.lambda_radius is None:
        return schedule.radius0
    return schedule.radius0 * schedule.base ** (-t / schedule.lambda_radius)


def learning_rate_at(t: int, schedule: DecaySchedule) -> float:
    """Learning rate at epoch ``t``; decays from rate0 to rate0/base."""
    _check_epoch(t, schedule)
    return schedule.rate0 * schedule.base ** (-t / schedule.lambda_rate)


def influence(d: float, radius: float, base: float = math.e) -> float:
    """Attenuation applied to a neighbor at lattice distance ``d`` from the BMU.

    Computed as ``base**(-d / (2 * radius))``: 1 at the BMU itself and
    strictly decreasing with distance relative to the current neighborhood
    diameter.
    """
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if d < 0.0:
        raise ValueError(f"distance must be nonnegative, got {d}")
    if base <= 1.0:
        raise ValueError(f"base must be > 1, got {base}")
    return base ** (-d / (2.0 * radius))
