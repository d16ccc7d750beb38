"""Planar polynomial trajectories, relative kinematics, and state transition matrices.

A trajectory is a polynomial in time about a reference instant,
``pos(t) = sum_k a_k (t - ref_time)^k`` with 2-vector coefficients ``a_k``.
The matching state vector stacks raw derivatives per target,
``[x, y, xdot, ydot, ..., x^(p), y^(p)]``, so that ``a_k = x^(k)/k!``.
The transition matrix carries the ``1/k!`` factors, which makes it the
exact matrix exponential of the chain-integrator dynamics and gives it the
semigroup property.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import ZeroRange

DEFAULT_EPS_RANGE = 1e-9


@dataclass(frozen=True)
class PolynomialTrajectory:
    """Planar trajectory as polynomial coefficients about a reference time.

    Attributes:
        ref_time: Reference instant t_i (s).
        coeffs: Tuple of (x, y) coefficients a_k in meters * s^-k, k = 0..p.
            Evaluation at ref_time returns coeffs[0] exactly.
    """

    ref_time: float
    coeffs: tuple[tuple[float, float], ...]

    def __post_init__(self):
        coeffs = tuple((float(x), float(y)) for x, y in self.coeffs)
        if len(coeffs) < 1:
            raise ValueError("coeffs must contain at least the position term a_0")
        object.__setattr__(self, "ref_time", float(self.ref_time))
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        """Polynomial order p (coeffs has length p + 1)."""
        return len(self.coeffs) - 1

    def eval(self, t: float, derivative_order: int = 0) -> np.ndarray:
        """Evaluate the trajectory or one of its time derivatives.

        Returns sum_{k>=d} a_k * k!/(k-d)! * (t - ref_time)^(k-d); the zero
        vector when derivative_order exceeds the polynomial order.
        """
        if derivative_order < 0:
            raise ValueError(f"derivative_order must be >= 0, got {derivative_order}")
        dt = float(t) - self.ref_time
        out = np.zeros(2)
        for k in range(derivative_order, len(self.coeffs)):
            scale = factorial(k) // factorial(k - derivative_order)
            out += np.asarray(self.coeffs[k]) * (scale * dt ** (k - derivative_order))
        return out

    def derivatives_at(self, t: float, order: int) -> np.ndarray:
        """Raw-derivative state [x, y, xdot, ydot, ..., x^(order), y^(order)] at t."""
        return np.concatenate([self.eval(t, k) for k in range(order + 1)])

    def padded(self, order: int) -> "PolynomialTrajectory":
        """Same trajectory with zero coefficients appended up to ``order``."""
        if order <= self.order:
            return self
        extra = ((0.0, 0.0),) * (order - self.order)
        return PolynomialTrajectory(self.ref_time, self.coeffs + extra)

    def effective_order(self) -> int:
        """Order after trimming trailing exactly-zero coefficient pairs."""
        p = self.order
        while p > 0 and self.coeffs[p] == (0.0, 0.0):
            p -= 1
        return p


@dataclass(frozen=True, eq=False)
class RelativeState:
    """Observer-to-target relative kinematics at one instant.

    range is the Euclidean norm of position; range_rate is the projection
    velocity . position / range, so |range_rate| <= ||velocity||.
    """

    position: np.ndarray
    velocity: np.ndarray
    range: float
    range_rate: float


@dataclass(frozen=True, eq=False)
class SampledTrajectory:
    """Trajectory known only at discrete sample times.

    Attributes:
        times: Strictly increasing sample instants (s), length >= 2.
        positions: (N, 2) array of positions (m).
    """

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        positions = np.asarray(self.positions, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("times must be a 1-D array of length >= 2")
        if positions.shape != (len(times), 2):
            raise ValueError(
                f"positions must have shape ({len(times)}, 2), got {positions.shape}"
            )
        if not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """State transition matrix for chain-integrator polynomial dynamics.

    matrix maps the raw-derivative state at t_i to the state at t; it is the
    identity at t = t_i and satisfies Phi(t2, t0) = Phi(t2, t1) @ Phi(t1, t0).
    """

    order: int
    matrix: np.ndarray


def relative_state(
    target: PolynomialTrajectory,
    observer: PolynomialTrajectory,
    t: float,
    eps_range: float = DEFAULT_EPS_RANGE,
) -> RelativeState:
    """Relative position/velocity, range, and range rate of target vs observer.

    Raises:
        ZeroRange: If the separation is below ``eps_range`` (range rate and
            bearing are undefined there).
    """
    position = target.eval(t, 0) - observer.eval(t, 0)
    velocity = target.eval(t, 1) - observer.eval(t, 1)
    rng = float(np.linalg.norm(position))
    if rng < eps_range:
        raise ZeroRange(
            f"target coincides with observer at t={t} (range {rng:.3e} m)", time=t
        )
    rate = float(velocity @ position / rng)
    return RelativeState(position=position, velocity=velocity, range=rng, range_rate=rate)


def transition_matrix(p: int, t: float, t_i: float) -> TransitionMatrix:
    """Transition matrix for a single order-p target.

    Block (k, j) for j >= k is (t - t_i)^(j-k) / (j-k)! * I_2, so the top
    block row carries the factors 1, dt, dt^2/2!, ... of the polynomial
    evaluation, and the matrix is the exponential of the shift dynamics.
    """
    if p < 0:
        raise ValueError(f"polynomial order must be >= 0, got {p}")
    dt = float(t) - float(t_i)
    upper = np.zeros((p + 1, p + 1))
    for k in range(p + 1):
        for j in range(k, p + 1):
            upper[k, j] = dt ** (j - k) / factorial(j - k)
    return TransitionMatrix(order=p, matrix=np.kron(upper, np.eye(2)))


def assemble_block_transition(orders: list[int], t: float, t_i: float) -> TransitionMatrix:
    """Block-diagonal transition matrix for several targets.

    The result is 2s x 2s with s = sum(p_i + 1); its ``order`` field holds
    the maximum per-target order.
    """
    if not orders:
        raise ValueError("orders must be non-empty")
    blocks = [transition_matrix(p, t, t_i).matrix for p in orders]
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    at = 0
    for b in blocks:
        n = b.shape[0]
        out[at:at + n, at:at + n] = b
        at += n
    return TransitionMatrix(order=max(orders), matrix=out)


def chain_integrator_matrix(p: int) -> np.ndarray:
    """Dynamics matrix E of the unforced chain integrator: d/dt x^(k) = x^(k+1)."""
    n = 2 * (p + 1)
    E = np.zeros((n, n))
    for k in range(p):
        E[2 * k:2 * k + 2, 2 * k + 2:2 * k + 4] = np.eye(2)
    return E


def propagate_ode(x_initial: np.ndarray, t_i: float, t_f: float, steps: int) -> np.ndarray:
    """Fixed-step RK4 propagation of the chain-integrator state.

    Serves as the independent numerical oracle for ``transition_matrix``:
    exact (to roundoff) for orders <= 4, O(h^4)-accurate above.

    Args:
        x_initial: Raw-derivative state of even length 2(p + 1).
        t_i: Start time (s).
        t_f: End time (s).
        steps: Number of RK4 steps, >= 1.
    """
    x = np.asarray(x_initial, dtype=float).copy()
    if x.ndim != 1 or len(x) % 2 != 0 or len(x) == 0:
        raise ValueError(f"state length must be even and positive, got {x.shape}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    p = len(x) // 2 - 1
    E = chain_integrator_matrix(p)
    h = (float(t_f) - float(t_i)) / steps
    for _ in range(steps):
        k1 = E @ x
        k2 = E @ (x + 0.5 * h * k1)
        k3 = E @ (x + 0.5 * h * k2)
        k4 = E @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def state_from_trajectory(traj: PolynomialTrajectory, t_i: float | None = None,
                          order: int | None = None) -> np.ndarray:
    """Raw-derivative state vector of a trajectory at t_i (default: ref_time)."""
    if t_i is None:
        t_i = traj.ref_time
    if order is None:
        order = traj.order
    return traj.derivatives_at(t_i, order)


def trajectory_from_state(state: np.ndarray, ref_time: float) -> PolynomialTrajectory:
    """Inverse of ``state_from_trajectory``: coefficients a_k = x^(k)/k!."""
    state = np.asarray(state, dtype=float)
    if state.ndim != 1 or len(state) % 2 != 0 or len(state) == 0:
        raise ValueError(f"state length must be even and positive, got {state.shape}")
    coeffs = tuple(
        (state[2 * k] / factorial(k), state[2 * k + 1] / factorial(k))
        for k in range(len(state) // 2)
    )
    return PolynomialTrajectory(ref_time=ref_time, coeffs=coeffs)
