"""Noise-free bearing/Doppler measurement generation and pseudo-linear rows.

Bearing convention: angle from the +y axis toward +x (tan theta = x/y),
resolved over the full circle with atan2(x, y) and wrapped to (-pi, pi].
Doppler uses the one-way narrowband model f0 * (1 - range_rate / c).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ZeroRange
from .trajectory import RelativeState, relative_state

if TYPE_CHECKING:
    from .scenario_io import Scenario

DEFAULT_SOUND_SPEED = 1500.0  # m/s, underwater acoustics context


@dataclass(frozen=True)
class Tonal:
    """Narrowband frequency radiated by a target."""

    f0: float

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError(f"tonal frequency must be > 0 Hz, got {self.f0}")
        object.__setattr__(self, "f0", float(self.f0))


@dataclass(frozen=True, eq=False)
class MeasurementHistory:
    """Per-target time series of bearings and (optionally) Doppler frequencies.

    Attributes:
        times: Grid instants (s), length N.
        bearings: (M, N) array of bearings in (-pi, pi].
        dopplers: Per-target length-N arrays of received frequency (Hz), or
            None for targets without a configured tonal.
    """

    times: np.ndarray
    bearings: np.ndarray
    dopplers: tuple[np.ndarray | None, ...]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        bearings = np.atleast_2d(np.asarray(self.bearings, dtype=float))
        if bearings.shape[1] != len(times):
            raise ValueError("bearings must have one column per time sample")
        dopplers = tuple(
            None if d is None else np.asarray(d, dtype=float) for d in self.dopplers
        )
        if len(dopplers) != bearings.shape[0]:
            raise ValueError("dopplers must have one entry per target")
        for d in dopplers:
            if d is not None and d.shape != times.shape:
                raise ValueError("each doppler series must match the time grid")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "bearings", bearings)
        object.__setattr__(self, "dopplers", dopplers)

    @property
    def num_targets(self) -> int:
        return self.bearings.shape[0]


def wrap_angle(theta: float | np.ndarray) -> float | np.ndarray:
    """Wrap an angle (or array) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if np.ndim(theta) == 0:
        return float(wrapped)
    return wrapped


def bearing(rel: RelativeState) -> float:
    """Full-quadrant bearing of a relative position, in (-pi, pi].

    Raises:
        ZeroRange: If the relative range is not positive.
    """
    if not rel.range > 0.0:
        raise ZeroRange("bearing undefined at zero range")
    return wrap_angle(np.arctan2(rel.position[0], rel.position[1]))


def doppler(tonal: Tonal, rel: RelativeState, c: float = DEFAULT_SOUND_SPEED) -> float:
    """Received frequency f0 * (1 - range_rate / c).

    Closing geometry (range_rate < 0) shifts the tonal up.
    """
    if not c > 0:
        raise ValueError(f"propagation speed must be > 0 m/s, got {c}")
    if not rel.range > 0.0:
        raise ZeroRange("doppler undefined at zero range")
    return tonal.f0 * (1.0 - rel.range_rate / c)


def pseudo_row(theta: float, p: int) -> np.ndarray:
    """Pseudo-linear measurement row [cos(theta), -sin(theta), 0, ..., 0].

    Length 2(p + 1); the trailing zeros blank out the derivative entries of
    the order-p state, so the row annihilates the true relative state.
    """
    if p < 0:
        raise ValueError(f"polynomial order must be >= 0, got {p}")
    row = np.zeros(2 * (p + 1))
    row[0] = np.cos(theta)
    row[1] = -np.sin(theta)
    return row


def assemble_C(thetas: list[float], orders: list[int]) -> np.ndarray:
    """M x 2s measurement matrix with per-target pseudo rows on the block diagonal."""
    if len(thetas) != len(orders):
        raise ValueError(
            f"thetas and orders must have equal length, got {len(thetas)} and {len(orders)}"
        )
    widths = [2 * (p + 1) for p in orders]
    C = np.zeros((len(thetas), sum(widths)))
    at = 0
    for i, (theta, p) in enumerate(zip(thetas, orders)):
        C[i, at:at + widths[i]] = pseudo_row(theta, p)
        at += widths[i]
    return C


def measure_scenario(scenario: "Scenario") -> MeasurementHistory:
    """Evaluate bearings (and Doppler where a tonal exists) over the scenario grid.

    Raises:
        ZeroRange: With the offending target index and time if any target
            meets the observer.
    """
    times = scenario.grid()
    eps = scenario.tolerances.eps_range
    bearings = np.zeros((len(scenario.targets), len(times)))
    dopplers: list[np.ndarray | None] = []
    for i, target in enumerate(scenario.targets):
        freq = np.zeros(len(times)) if target.tonal is not None else None
        for k, t in enumerate(times):
            try:
                rel = relative_state(target.trajectory, scenario.observer, t, eps)
            except ZeroRange as exc:
                raise ZeroRange(
                    f"target {i} coincides with observer at t={t}",
                    target_index=i, time=float(t),
                ) from exc
            bearings[i, k] = bearing(rel)
            if freq is not None:
                freq[k] = doppler(target.tonal, rel, scenario.c)
        dopplers.append(freq)
    return MeasurementHistory(times=times, bearings=bearings, dopplers=tuple(dopplers))


def angular_difference(a: float | np.ndarray, b: float | np.ndarray) -> float | np.ndarray:
    """Absolute circular distance between two angles, in [0, pi]."""
    return np.abs(wrap_angle(np.asarray(a) - np.asarray(b)))
