"""Construction and verification of ambiguous trajectory pairs.

Two targets are ambiguous under a measurement regime when their measurement
histories coincide over the whole window. Doppler equality constrains only
the range histories: integrating the equal-frequency condition gives

    s_i(t) = l' s_j(t) + b' + c (1 - l') (t - t_i),
    l' = f_j0 / f_i0,   b' = s_i(0) - l' s_j(0),

so any direction history obtained by rotating the base target's line of
sight preserves Doppler while (generically) breaking bearings. Bearing
equality constrains only directions: s_i(t) = alpha(t) s_j(t) for any
positive scalar profile alpha. Requiring both regimes forces the rotation
to be trivial and ties the scale to the range relation, which is the
rigidity that the combined-measurement eigencheck quantifies.

Rotation angles are counterclockwise in the x-y plane. ``rotation`` and
``alpha`` profiles may be callables of time, per-node sample arrays, or
scalars (constant profiles).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import NonPositiveAlpha, NonPositiveRange, ZeroRange
from .measurement import angular_difference
from .trajectory import (DEFAULT_EPS_RANGE, PolynomialTrajectory, SampledTrajectory,
                         relative_state)

DOPPLER = "doppler"
BEARING = "bearing"
COMBINED = "combined"
AMBIGUOUS = "ambiguous"
DISTINGUISHABLE = "distinguishable"

ScalarProfile = Union[Callable[[float], float], np.ndarray, float]
Trajectory = Union[PolynomialTrajectory, SampledTrajectory]


@dataclass(frozen=True, eq=False)
class DopplerAmbiguitySpec:
    """Parameters of a Doppler-preserving counterpart trajectory.

    Attributes:
        l_prime: Tonal ratio f_j0 / f_i0 (> 0); the generated target must
            radiate f_i0 = f_j0 / l_prime for its Doppler history to match.
        b_prime: Initial range offset s_i(0) - l_prime * s_j(0), meters.
        rotation: Line-of-sight rotation angle profile (radians).
        c: Propagation speed (m/s).
    """

    l_prime: float
    b_prime: float
    rotation: ScalarProfile
    c: float = 1500.0

    def __post_init__(self):
        if not self.l_prime > 0:
            raise ValueError(f"l_prime must be > 0, got {self.l_prime}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0 m/s, got {self.c}")


@dataclass(frozen=True, eq=False)
class AmbiguityCertificate:
    """Residuals of a trajectory pair and the per-regime verdict.

    verdict is "ambiguous" when the regime-relevant residuals fall below
    their tolerances: Doppler compares received-frequency histories,
    bearing compares direction histories, combined requires both.
    """

    trajectory_i: Trajectory
    trajectory_j: Trajectory
    regime: str
    residual_doppler: float | None
    residual_bearing: float
    verdict: str
    tol_f: float | None
    tol_theta: float
    tonals: tuple[float, float] | None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "verdict": self.verdict,
            "residual_doppler": self.residual_doppler,
            "residual_bearing": self.residual_bearing,
            "tol_f": self.tol_f,
            "tol_theta": self.tol_theta,
            "tonals": None if self.tonals is None else list(self.tonals),
            "trajectory_i": _traj_dict(self.trajectory_i),
            "trajectory_j": _traj_dict(self.trajectory_j),
        }


@dataclass(frozen=True, eq=False)
class CombinedConditionReport:
    """Per-node eigencheck of the combined-measurement rigidity condition.

    The range-relation transform W(t) (rotation times scale) must map the
    base relative position onto itself for the pair to stay ambiguous under
    both measurements; eigen_residuals is the relative off-eigenvector part
    (|sin| of the rotation), alphas the Rayleigh-quotient scale.
    combined_ambiguous requires the eigenvector condition AND alpha == 1,
    which forces the trajectories to coincide.
    """

    times: np.ndarray
    alphas: np.ndarray
    eigen_residuals: np.ndarray
    position_residuals: np.ndarray
    max_eigen_residual: float
    max_alpha_deviation: float
    eigenvector_condition_holds: bool
    alpha_is_unity: bool
    combined_ambiguous: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "combined_ambiguous": self.combined_ambiguous,
            "eigenvector_condition_holds": self.eigenvector_condition_holds,
            "alpha_is_unity": self.alpha_is_unity,
            "max_eigen_residual": self.max_eigen_residual,
            "max_alpha_deviation": self.max_alpha_deviation,
            "tol": self.tol,
            "times": list(self.times),
            "alphas": list(self.alphas),
            "eigen_residuals": list(self.eigen_residuals),
            "position_residuals": list(self.position_residuals),
        }


@dataclass(frozen=True, eq=False)
class DopplerSufficiencyReport:
    """Status of the three sufficient conditions for Doppler-history equality.

    The triple (equal tonals, identity transform, equal ranges) is
    sufficient but not necessary: implication_holds only asserts that
    whenever all three hold, the Doppler residual is below tolerance.
    """

    tonals_equal: bool
    transform_is_identity: bool
    ranges_equal: bool
    all_conditions_hold: bool
    residual_doppler: float
    implication_holds: bool
    max_transform_deviation: float
    max_range_deviation: float
    tol: float
    tol_f: float

    def to_dict(self) -> dict:
        return {
            "tonals_equal": self.tonals_equal,
            "transform_is_identity": self.transform_is_identity,
            "ranges_equal": self.ranges_equal,
            "all_conditions_hold": self.all_conditions_hold,
            "residual_doppler": self.residual_doppler,
            "implication_holds": self.implication_holds,
            "max_transform_deviation": self.max_transform_deviation,
            "max_range_deviation": self.max_range_deviation,
            "tol": self.tol,
            "tol_f": self.tol_f,
        }


def _traj_dict(traj: Trajectory) -> dict:
    if isinstance(traj, PolynomialTrajectory):
        return {"type": "polynomial", "ref_time": traj.ref_time,
                "coeffs": [list(c) for c in traj.coeffs]}
    return {"type": "sampled", "times": list(traj.times),
            "positions": [list(p) for p in traj.positions]}


def _profile_values(profile: ScalarProfile, times: np.ndarray, name: str) -> np.ndarray:
    if callable(profile):
        return np.array([float(profile(t)) for t in times])
    values = np.asarray(profile, dtype=float)
    if values.ndim == 0:
        return np.full(len(times), float(values))
    if values.shape != times.shape:
        raise ValueError(
            f"{name} samples must match the grid length {len(times)}, got {values.shape}")
    return values


def _grid(grid: np.ndarray) -> np.ndarray:
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError("grid must be a 1-D array of at least two times")
    if not np.all(np.diff(times) > 0):
        raise ValueError("grid times must be strictly increasing")
    return times


def _observer_positions(observer: PolynomialTrajectory, times: np.ndarray) -> np.ndarray:
    return np.array([observer.eval(t, 0) for t in times])


def _relative_series(traj: Trajectory, observer: PolynomialTrajectory,
                     times: np.ndarray, eps_range: float):
    """Relative positions, ranges, and range rates of a trajectory on the grid.

    Polynomial trajectories get exact range rates; sampled ones get central
    differences of the range history (second-order one-sided at the ends).
    """
    if isinstance(traj, PolynomialTrajectory):
        rel = np.empty((len(times), 2))
        ranges = np.empty(len(times))
        rates = np.empty(len(times))
        for k, t in enumerate(times):
            state = relative_state(traj, observer, t, eps_range)
            rel[k] = state.position
            ranges[k] = state.range
            rates[k] = state.range_rate
        return rel, ranges, rates
    if len(traj.times) != len(times) or not np.allclose(
            traj.times, times, rtol=0.0, atol=1e-9):
        raise ValueError("sampled trajectory times must coincide with the grid")
    rel = traj.positions - _observer_positions(observer, times)
    ranges = np.linalg.norm(rel, axis=1)
    if np.any(ranges < eps_range):
        k = int(np.argmin(ranges))
        raise ZeroRange(f"trajectory meets the observer at t={times[k]}",
                        time=float(times[k]))
    # edge_order=2 keeps the one-sided endpoint differences at O(dt^2),
    # matching the interior central differences.
    return rel, ranges, np.gradient(ranges, times, edge_order=2)


def _rotate(vectors: np.ndarray, angles: np.ndarray) -> np.ndarray:
    cos, sin = np.cos(angles), np.sin(angles)
    x, y = vectors[:, 0], vectors[:, 1]
    return np.column_stack([cos * x - sin * y, sin * x + cos * y])


def default_doppler_tolerance(f_ref: float, times: np.ndarray) -> float:
    """Roundoff floor plus central-difference slack: 1e-9 * f_ref + 10 * dt^2 Hz."""
    dt = float(np.max(np.diff(times)))
    return 1e-9 * f_ref + 10.0 * dt ** 2


def generate_doppler_ambiguous(
    base: PolynomialTrajectory,
    observer: PolynomialTrajectory,
    spec: DopplerAmbiguitySpec,
    grid: np.ndarray,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> SampledTrajectory:
    """Counterpart trajectory with an identical Doppler history.

    At each grid time the counterpart keeps the range dictated by the
    integrated equal-frequency relation and points along the base line of
    sight rotated by the spec's angle profile. It must radiate the tonal
    f_j0 / l_prime for the histories to coincide.

    Raises:
        NonPositiveRange: If the range relation goes non-positive on the
            window (spec infeasible).
        ZeroRange: If the base trajectory meets the observer.
    """
    times = _grid(grid)
    t_i = times[0]
    rel_j, s_j, _ = _relative_series(base, observer, times, eps_range)
    s_i = spec.l_prime * s_j + spec.b_prime + spec.c * (1.0 - spec.l_prime) * (times - t_i)
    if np.any(s_i <= 0):
        k = int(np.argmax(s_i <= 0))
        raise NonPositiveRange(
            f"derived range {s_i[k]:.6g} m at t={times[k]}; "
            f"spec infeasible on this window", time=float(times[k]))
    psi = _profile_values(spec.rotation, times, "rotation")
    u_i = _rotate(rel_j / s_j[:, None], psi)
    positions = _observer_positions(observer, times) + s_i[:, None] * u_i
    return SampledTrajectory(times=times, positions=positions)


def generate_bearing_ambiguous(
    base: PolynomialTrajectory,
    observer: PolynomialTrajectory,
    alpha: ScalarProfile,
    grid: np.ndarray,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> SampledTrajectory:
    """Counterpart trajectory with an identical bearing history.

    Scales the base relative position by the positive profile alpha(t);
    positive scaling preserves the line-of-sight direction exactly.

    Raises:
        NonPositiveAlpha: If the profile is not strictly positive on the grid.
    """
    times = _grid(grid)
    values = _profile_values(alpha, times, "alpha")
    if np.any(values <= 0):
        k = int(np.argmax(values <= 0))
        raise NonPositiveAlpha(
            f"alpha({times[k]}) = {values[k]:.6g} must be > 0", time=float(times[k]))
    rel_j, _, _ = _relative_series(base, observer, times, eps_range)
    positions = _observer_positions(observer, times) + values[:, None] * rel_j
    return SampledTrajectory(times=times, positions=positions)


def _doppler_residual(tonals, c, rates_i, rates_j) -> float:
    f_i0, f_j0 = tonals
    f_i = f_i0 * (1.0 - rates_i / c)
    f_j = f_j0 * (1.0 - rates_j / c)
    return float(np.max(np.abs(f_i - f_j)))


def verify_ambiguity(
    traj_i: Trajectory,
    traj_j: Trajectory,
    observer: PolynomialTrajectory,
    tonals: tuple[float, float] | None,
    c: float,
    grid: np.ndarray,
    regime: str = COMBINED,
    tol_f: float | None = None,
    tol_theta: float = 1e-8,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> AmbiguityCertificate:
    """Compare the measurement histories of a trajectory pair.

    Args:
        tonals: (f_i0, f_j0) radiated frequencies; None skips the Doppler
            residual (allowed only for the bearing regime).
        tol_f: Doppler tolerance in Hz; defaults to
            1e-9 * max tonal + 10 * dt^2 (discretization slack for sampled
            trajectories).
        regime: "doppler", "bearing", or "combined".
    """
    if regime not in (DOPPLER, BEARING, COMBINED):
        raise ValueError(f"unknown regime {regime!r}")
    times = _grid(grid)
    rel_i, _, rates_i = _relative_series(traj_i, observer, times, eps_range)
    rel_j, _, rates_j = _relative_series(traj_j, observer, times, eps_range)

    theta_i = np.arctan2(rel_i[:, 0], rel_i[:, 1])
    theta_j = np.arctan2(rel_j[:, 0], rel_j[:, 1])
    residual_bearing = float(np.max(angular_difference(theta_i, theta_j)))

    residual_doppler = None
    if tonals is not None:
        if tol_f is None:
            tol_f = default_doppler_tolerance(max(tonals), times)
        residual_doppler = _doppler_residual(tonals, c, rates_i, rates_j)
    elif regime != BEARING:
        raise ValueError(f"{regime} regime requires tonals")

    doppler_ok = residual_doppler is not None and residual_doppler < tol_f
    bearing_ok = residual_bearing < tol_theta
    if regime == DOPPLER:
        ambiguous = doppler_ok
    elif regime == BEARING:
        ambiguous = bearing_ok
    else:
        ambiguous = doppler_ok and bearing_ok

    return AmbiguityCertificate(
        trajectory_i=traj_i,
        trajectory_j=traj_j,
        regime=regime,
        residual_doppler=residual_doppler,
        residual_bearing=residual_bearing,
        verdict=AMBIGUOUS if ambiguous else DISTINGUISHABLE,
        tol_f=tol_f,
        tol_theta=tol_theta,
        tonals=tonals,
    )


def check_combined_condition(
    traj_i: Trajectory,
    traj_j: Trajectory,
    observer: PolynomialTrajectory,
    spec: DopplerAmbiguitySpec,
    grid: np.ndarray,
    tol: float = 1e-8,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> CombinedConditionReport:
    """Eigencheck of the combined-measurement rigidity condition.

    Reconstructs W(t) = R(rotation(t)) * [l' + (b' + c (1 - l')(t - t_i)) /
    s_j(t)] from the spec and the base ranges, then reports per node the
    Rayleigh scale alpha(t) = s_j^T W s_j / |s_j|^2, the relative residual
    of W s_j off the s_j direction, and whether alpha(t) = 1 throughout.
    Both must hold for combined ambiguity, which forces the pair to
    coincide; position_residuals additionally checks the position-difference
    identity pos_i - pos_j = (W - I) s_j against the actual pair.
    """
    times = _grid(grid)
    t_i = times[0]
    rel_i, _, _ = _relative_series(traj_i, observer, times, eps_range)
    rel_j, s_j, _ = _relative_series(traj_j, observer, times, eps_range)

    psi = _profile_values(spec.rotation, times, "rotation")
    scale = spec.l_prime + (
        spec.b_prime + spec.c * (1.0 - spec.l_prime) * (times - t_i)) / s_j

    w_rel = scale[:, None] * _rotate(rel_j, psi)
    alphas = np.einsum("ij,ij->i", rel_j, w_rel) / s_j ** 2
    w_norm = np.abs(scale) * s_j
    eigen_residuals = np.linalg.norm(
        w_rel - alphas[:, None] * rel_j, axis=1) / np.where(w_norm > 0, w_norm, 1.0)
    position_residuals = np.linalg.norm(
        (rel_i - rel_j) - (w_rel - rel_j), axis=1) / s_j

    max_eigen = float(np.max(eigen_residuals))
    max_alpha_dev = float(np.max(np.abs(alphas - 1.0)))
    eig_ok = max_eigen < tol
    alpha_ok = max_alpha_dev < tol
    return CombinedConditionReport(
        times=times,
        alphas=alphas,
        eigen_residuals=eigen_residuals,
        position_residuals=position_residuals,
        max_eigen_residual=max_eigen,
        max_alpha_deviation=max_alpha_dev,
        eigenvector_condition_holds=eig_ok,
        alpha_is_unity=alpha_ok,
        combined_ambiguous=eig_ok and alpha_ok,
        tol=tol,
    )


def check_doppler_sufficiency(
    traj_i: Trajectory,
    traj_j: Trajectory,
    observer: PolynomialTrajectory,
    tonals: tuple[float, float],
    c: float,
    grid: np.ndarray,
    tol: float = 1e-8,
    tol_f: float | None = None,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> DopplerSufficiencyReport:
    """Check the three sufficient conditions for equal Doppler histories.

    The conditions are (1) equal radiated tonals, (2) the geometric
    transform carrying the base relative position onto the counterpart is
    the identity, (3) equal ranges. The transform is reconstructed from the
    pair itself: per-node scale s_i / s_j and the rotation carrying one
    line of sight onto the other. The report also confirms the implication
    "all three hold => Doppler residual below tolerance"; the converse is
    false (the triple is not necessary), which callers can see on pairs
    with unequal tonals and matching residuals.
    """
    times = _grid(grid)
    rel_i, s_i, rates_i = _relative_series(traj_i, observer, times, eps_range)
    rel_j, s_j, rates_j = _relative_series(traj_j, observer, times, eps_range)
    if tol_f is None:
        tol_f = default_doppler_tolerance(max(tonals), times)

    f_i0, f_j0 = tonals
    tonals_equal = abs(f_i0 - f_j0) <= tol * max(f_i0, f_j0)

    # W = scale * R(delta) with scale = s_i/s_j and delta the angle from
    # u_j to u_i; deviation from identity is |scale * e^(i delta) - 1|.
    scale = s_i / s_j
    dot = np.einsum("ij,ij->i", rel_i, rel_j)
    cross = rel_j[:, 0] * rel_i[:, 1] - rel_j[:, 1] * rel_i[:, 0]
    delta = np.arctan2(cross, dot)
    transform_dev = np.sqrt(
        (scale * np.cos(delta) - 1.0) ** 2 + (scale * np.sin(delta)) ** 2)
    max_transform_dev = float(np.max(transform_dev))
    transform_is_identity = max_transform_dev < tol

    range_dev = np.abs(s_i - s_j) / s_j
    max_range_dev = float(np.max(range_dev))
    ranges_equal = max_range_dev < tol

    residual = _doppler_residual(tonals, c, rates_i, rates_j)
    all_hold = tonals_equal and transform_is_identity and ranges_equal
    return DopplerSufficiencyReport(
        tonals_equal=tonals_equal,
        transform_is_identity=transform_is_identity,
        ranges_equal=ranges_equal,
        all_conditions_hold=all_hold,
        residual_doppler=residual,
        implication_holds=(not all_hold) or residual < tol_f,
        max_transform_deviation=max_transform_dev,
        max_range_deviation=max_range_dev,
        tol=tol,
        tol_f=tol_f,
    )


def ranges_match_relation(
    generated: SampledTrajectory,
    base: PolynomialTrajectory,
    observer: PolynomialTrajectory,
    spec: DopplerAmbiguitySpec,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> float:
    """Max relative gap between the generated geometry's ranges and the range relation.

    Round-trip check of the generator: measures the counterpart's ranges
    from its positions and compares with l' s_j + b' + c (1 - l') (t - t_i).
    """
    times = generated.times
    _, s_j, _ = _relative_series(base, observer, times, eps_range)
    _, s_i, _ = _relative_series(generated, observer, times, eps_range)
    predicted = spec.l_prime * s_j + spec.b_prime + spec.c * (1.0 - spec.l_prime) * (
        times - times[0])
    return float(np.max(np.abs(s_i - predicted) / predicted))
