"""Attitude controllers: PD + feedback linearization and adaptive backstepping.

Both controllers act on the simplified dynamics ``xdd = f(x, xd) + g(x) u``
from :mod:`agrosim.dynamics` and emit *unsaturated* body torques; torque
limiting and wheel allocation happen downstream in the simulation layer.

Feedback linearization cancels f exactly and imposes the linear error
dynamics ``e_dd + k1 e_d + k2 e = 0`` per axis through the pseudo-input
``v = xd_dd + k1 ed + k2 e``.

The backstepping controller treats the rate as a virtual control with
stabilizing function ``U_v = xd_d + K1 e1`` and drives the deviation
``e2 = U_v - xd`` to zero with

    U_B = g^-1 (Lam^-1 Gam e1 - f - L_hat + xd_dd + K1 e1_d + K2 e2)

while the disturbance estimate follows the adaptation law
``L_hat_dot = -Sig^-1 Lam e2``.  All gain matrices are positive diagonal and
stored as 3-vectors; a scalar gain means "that scalar on every axis".

Controllers are pure functions; the only state is the explicit
:class:`AdaptState` threaded by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import (
    BodyState,
    BodyTorque,
    EffectiveInertias,
    _ArrayEqMixin,
    _vec3,
)
from .errors import InvalidParameterError

#: Default bound on ||x_d||^2 + ||xd_d||^2 + ||xd_dd||^2 for references.
DEFAULT_REFERENCE_BOUND = 100.0


def _gain_vec(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        v = np.full(3, float(v))
    v = _vec3(v, name)
    if not (v > 0.0).all():
        raise InvalidParameterError(f"{name} entries must be positive, got {v}")
    return v


@dataclass(frozen=True, eq=False)
class FlGains(_ArrayEqMixin):
    """Per-axis feedback-linearization gains.

    ``k1`` (1/s) weights the velocity error and ``k2`` (1/s^2) the position
    error.  Positive entries make ``e_dd + k1 e_d + k2 e = 0`` Hurwitz, so
    anything else is rejected at construction.
    """

    k1: np.ndarray
    k2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k1", _gain_vec(self.k1, "k1"))
        object.__setattr__(self, "k2", _gain_vec(self.k2, "k2"))

    @classmethod
    def from_scalars(cls, k1: float, k2: float) -> "FlGains":
        return cls(np.full(3, float(k1)), np.full(3, float(k2)))


@dataclass(frozen=True, eq=False)
class BsGains(_ArrayEqMixin):
    """Backstepping gains K1, K2 and Lyapunov weights Gamma, Lambda, Sigma,
    each a positive diagonal stored as a 3-vector."""

    k1: np.ndarray
    k2: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        for name in ("k1", "k2", "gamma", "lam", "sigma"):
            object.__setattr__(self, name, _gain_vec(getattr(self, name), name))

    @classmethod
    def from_scalars(
        cls, k1: float, k2: float, gamma: float = 1.0, lam: float = 1.0, sigma: float = 1.0
    ) -> "BsGains":
        return cls(k1, k2, gamma, lam, sigma)


@dataclass(frozen=True, eq=False)
class Reference(_ArrayEqMixin):
    """Desired attitude trajectory sample (x_d, xd_d, xd_dd).

    The combined squared magnitude must stay under ``rho`` (boundedness
    assumption of the stability analysis; configurable).
    """

    x_d: np.ndarray
    xd_dot: np.ndarray
    xd_ddot: np.ndarray
    rho: float = DEFAULT_REFERENCE_BOUND

    def __post_init__(self):
        object.__setattr__(self, "x_d", _vec3(self.x_d, "x_d"))
        object.__setattr__(self, "xd_dot", _vec3(self.xd_dot, "xd_dot"))
        object.__setattr__(self, "xd_ddot", _vec3(self.xd_ddot, "xd_ddot"))
        object.__setattr__(self, "rho", float(self.rho))
        total = (
            float(self.x_d @ self.x_d)
            + float(self.xd_dot @ self.xd_dot)
            + float(self.xd_ddot @ self.xd_ddot)
        )
        if total > self.rho:
            raise InvalidParameterError(
                f"reference magnitude {total:g} exceeds bound rho = {self.rho:g}"
            )

    @classmethod
    def zero(cls) -> "Reference":
        return cls(np.zeros(3), np.zeros(3), np.zeros(3))

    @classmethod
    def constant(cls, x_d, rho: float = DEFAULT_REFERENCE_BOUND) -> "Reference":
        return cls(np.asarray(x_d, dtype=float), np.zeros(3), np.zeros(3), rho)


@dataclass(frozen=True, eq=False)
class AdaptState(_ArrayEqMixin):
    """Current disturbance estimate L_hat (rad/s^2, acceleration domain)."""

    l_hat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "l_hat", _vec3(self.l_hat, "l_hat"))

    @classmethod
    def zero(cls) -> "AdaptState":
        return cls(np.zeros(3))


@dataclass(frozen=True, eq=False)
class LyapunovSample(_ArrayEqMixin):
    """Diagnostic Lyapunov values along a trajectory.

    V1 = 1/2 e1' e1 and V2 = 1/2 e1' Gam e1 + 1/2 e2' Lam e2
    + 1/2 Lt' Sig Lt with the estimation error Lt = L - L_hat.
    """

    v1: float
    v2: float
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        for name in ("v1", "v2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "e1", _vec3(self.e1, "e1"))
        object.__setattr__(self, "e2", _vec3(self.e2, "e2"))


# ---------------------------------------------------------------------------
# Array-level control laws.  These are the hot path shared with the
# simulation loop; the typed wrappers below add the domain objects.
# ---------------------------------------------------------------------------

def _fl_torque(att, rate, x_d, xd_dot, xd_ddot, k1, k2, j1, j2):
    e = x_d - att
    e_dot = xd_dot - rate
    v = xd_ddot + k1 * e_dot + k2 * e
    f = np.array([
        j2[0] / j1[0] * rate[1] * rate[2],
        j2[1] / j1[1] * rate[0] * rate[2],
        j2[2] / j1[2] * rate[0] * rate[1],
    ])
    return j1 * (v - f)


def _bs_velocity_error(att, rate, x_d, xd_dot, k1):
    return xd_dot - rate + k1 * (x_d - att)


def _bs_torque(att, rate, x_d, xd_dot, xd_ddot, l_hat, k1, k2, gamma, lam, j1, j2):
    e1 = x_d - att
    e1_dot = xd_dot - rate
    e2 = e1_dot + k1 * e1
    f = np.array([
        j2[0] / j1[0] * rate[1] * rate[2],
        j2[1] / j1[1] * rate[0] * rate[2],
        j2[2] / j1[2] * rate[0] * rate[1],
    ])
    return j1 * (gamma / lam * e1 - f - l_hat + xd_ddot + k1 * e1_dot + k2 * e2)


def _adaptation_rate(e2, lam, sigma):
    return -lam / sigma * e2


# ---------------------------------------------------------------------------
# Typed operations
# ---------------------------------------------------------------------------

def fl_control(
    state: BodyState, ref: Reference, gains: FlGains, eff: EffectiveInertias
) -> BodyTorque:
    """Feedback-linearization torque u = g^-1 (-f + xd_dd + k1 ed + k2 e).

    The returned torque is unsaturated; clamping belongs to the plant side.
    """
    tau = _fl_torque(
        state.attitude, state.rate, ref.x_d, ref.xd_dot, ref.xd_ddot,
        gains.k1, gains.k2, eff.j1, eff.j2,
    )
    return BodyTorque(tau)


def bs_virtual_control(ref: Reference, e1: np.ndarray, gains: BsGains) -> np.ndarray:
    """Stabilizing function U_v = xd_d + K1 e1: the rate the backstepping
    design asks the plant to track."""
    return ref.xd_dot + gains.k1 * np.asarray(e1, dtype=float)


def bs_velocity_error(state: BodyState, ref: Reference, gains: BsGains) -> np.ndarray:
    """Deviation of the rate from its virtual control, e2 = U_v - xd."""
    return _bs_velocity_error(state.attitude, state.rate, ref.x_d, ref.xd_dot, gains.k1)


def bs_control(
    state: BodyState,
    ref: Reference,
    gains: BsGains,
    eff: EffectiveInertias,
    adapt: AdaptState,
) -> BodyTorque:
    """Backstepping torque

        U_B = g^-1 (Lam^-1 Gam e1 - f - L_hat + xd_dd + K1 e1_d + K2 e2)

    with e1_d = xd_d - xd taken from the measured rate.  Unsaturated."""
    tau = _bs_torque(
        state.attitude, state.rate, ref.x_d, ref.xd_dot, ref.xd_ddot, adapt.l_hat,
        gains.k1, gains.k2, gains.gamma, gains.lam, eff.j1, eff.j2,
    )
    return BodyTorque(tau)


def adaptation_rate(e2: np.ndarray, gains: BsGains) -> np.ndarray:
    """Estimate derivative L_hat_dot = -Sig^-1 Lam e2."""
    return _adaptation_rate(np.asarray(e2, dtype=float), gains.lam, gains.sigma)


def adapt_update(adapt: AdaptState, e2: np.ndarray, gains: BsGains, dt: float) -> AdaptState:
    """Advance the disturbance estimate one step of size ``dt``.

    ``e2`` is treated as constant over the step, for which every Runge-Kutta
    scheme reduces to the forward-Euler increment; inside a closed-loop
    simulation the estimate is instead integrated as part of the augmented
    state so it sees the same stage evaluations as the plant.
    """
    if not dt > 0.0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    return AdaptState(adapt.l_hat + dt * adaptation_rate(e2, gains))


def lyapunov_sample(
    state: BodyState,
    ref: Reference,
    gains: BsGains,
    adapt: AdaptState,
    l_true: np.ndarray,
) -> LyapunovSample:
    """Evaluate the two Lyapunov functions for diagnostics.

    ``l_true`` is the actual acceleration-domain disturbance, known only to
    the simulation; the estimation error enters V2 through the Sigma term.
    """
    e1 = ref.x_d - state.attitude
    e2 = bs_velocity_error(state, ref, gains)
    l_err = np.asarray(l_true, dtype=float) - adapt.l_hat
    v1 = 0.5 * float(e1 @ e1)
    v2 = (
        0.5 * float(e1 @ (gains.gamma * e1))
        + 0.5 * float(e2 @ (gains.lam * e2))
        + 0.5 * float(l_err @ (gains.sigma * l_err))
    )
    return LyapunovSample(v1, v2, e1, e2)


class LqrGains(NamedTuple):
    """Double-integrator LQR result, ordered (position gain, velocity gain)."""

    k2: float
    k1: float


def lqr_double_integrator(q_pos: float, q_vel: float, r: float) -> LqrGains:
    """Closed-form continuous LQR for the plant xdd = v.

    Minimizes the cost integral of ``q_pos e^2 + q_vel ed^2 + r v^2``; the
    algebraic Riccati equation gives

        k2 = sqrt(q_pos / r)
        k1 = sqrt((q_vel + 2 sqrt(q_pos r)) / r)

    so the closed loop ``e_dd + k1 e_d + k2 e = 0`` is always Hurwitz.

    Raises
    ------
    InvalidParameterError
        If ``r <= 0``, ``q_pos <= 0`` or ``q_vel < 0``.
    """
    if not r > 0.0:
        raise InvalidParameterError(f"control weight r must be positive, got {r}")
    if not q_pos > 0.0:
        raise InvalidParameterError(f"position weight must be positive, got {q_pos}")
    if q_vel < 0.0:
        raise InvalidParameterError(f"velocity weight must be non-negative, got {q_vel}")
    k2 = np.sqrt(q_pos / r)
    k1 = np.sqrt((q_vel + 2.0 * np.sqrt(q_pos * r)) / r)
    return LqrGains(float(k2), float(k1))
