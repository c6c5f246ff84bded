"""Airborne rigid-body attitude dynamics of a 4WIDS robot.

The chassis is reoriented in flight by the reaction torques of its four
steerable drive wheels.  With the steering angles frozen and torques applied
cross-symmetrically (tau_1 = -tau_3, tau_2 = -tau_4), the attitude dynamics
reduce to three coupled second-order equations

    phi_dd   = (J_phi2   * theta_d * psi_d + tau_x) / J_phi1
    theta_dd = (J_theta2 * phi_d   * psi_d + tau_y) / J_theta1
    psi_dd   = (J_psi2   * phi_d   * theta_d + tau_z) / J_psi1

or in vector form ``xdd = f(x, xd) + g(x) u`` with diagonal ``g``.  This
module owns the inertia bookkeeping, the equations of motion, and the
Jacobian maps between body torques and wheel/steering torques.

Angles are radians throughout; the command-line layer converts from degrees.
All values are immutable after construction and all functions are pure, so
everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import (
    AllocationSingularityError,
    DegenerateInertiaError,
    InvalidParameterError,
)

#: Steering configurations with |sin(delta1 - delta2)| below this lose
#: roll/pitch torque authority and cannot be inverted.
SINGULARITY_TOL = 1e-6


def _vec3(value, name: str) -> np.ndarray:
    v = np.array(value, dtype=float)  # copy: the stored array is frozen below
    if v.shape != (3,):
        raise InvalidParameterError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise InvalidParameterError(f"{name} must be finite, got {v}")
    v.flags.writeable = False
    return v


class _ArrayEqMixin:
    """Value equality for frozen dataclasses that hold numpy arrays."""

    def __eq__(self, other):
        if other.__class__ is not self.__class__:
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True

    def __hash__(self):
        return NotImplemented


@dataclass(frozen=True)
class SteeringConfig:
    """Frozen steering angles, measured from the forward driving direction.

    Cross-symmetry (delta1 = delta3, delta2 = delta4) is implicit: only the
    two independent angles are stored.  ``delta1 = +45 deg, delta2 = -45 deg``
    is the isotropic configuration that equalizes roll and pitch authority.
    """

    delta1: float
    delta2: float

    def __post_init__(self):
        for name in ("delta1", "delta2"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_degrees(cls, delta1_deg: float, delta2_deg: float) -> "SteeringConfig":
        return cls(np.deg2rad(delta1_deg), np.deg2rad(delta2_deg))

    @classmethod
    def isotropic(cls) -> "SteeringConfig":
        return cls(np.pi / 4.0, -np.pi / 4.0)

    def is_singular(self, tol: float = SINGULARITY_TOL) -> bool:
        return abs(np.sin(self.delta1 - self.delta2)) < tol


@dataclass(frozen=True)
class WheelGeometry:
    """Wheel-module placement: track ``a``, wheelbase ``b``, steering offset
    ``c`` (all m) and per-module mass ``m_w`` (kg)."""

    a: float
    b: float
    c: float
    m_w: float

    def __post_init__(self):
        if not (np.isfinite(self.m_w) and self.m_w > 0.0):
            raise InvalidParameterError(f"wheel mass must be positive, got {self.m_w}")
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v >= 0.0):
                raise InvalidParameterError(f"{name} must be non-negative, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "m_w", float(self.m_w))


def reflected_inertia(geometry: WheelGeometry, steering: SteeringConfig) -> tuple[float, float]:
    """Chassis inertia contributed by the wheel masses about roll and pitch.

        J_mWxx = 2 m_w ((b/2 + c cos d1)^2 + (b/2 + c cos d2)^2)
        J_mWyy = 2 m_w ((a/2 + c sin d1)^2 + (b/2 + c sin d2)^2)

    The mixed a/b dependence of the second expression is implemented exactly
    as modelled; see the package docs for the asymmetry note.

    Returns
    -------
    (J_mWxx, J_mWyy) : tuple of float, kg m^2
    """
    a, b, c, m_w = geometry.a, geometry.b, geometry.c, geometry.m_w
    d1, d2 = steering.delta1, steering.delta2
    j_xx = 2.0 * m_w * ((b / 2.0 + c * np.cos(d1)) ** 2 + (b / 2.0 + c * np.cos(d2)) ** 2)
    j_yy = 2.0 * m_w * ((a / 2.0 + c * np.sin(d1)) ** 2 + (b / 2.0 + c * np.sin(d2)) ** 2)
    return float(j_xx), float(j_yy)


@dataclass(frozen=True, eq=False)
class InertiaSet(_ArrayEqMixin):
    """Inertia data for the airborne model.

    Parameters
    ----------
    j_body : (3,) array
        Chassis principal inertias [J_Bxx, J_Byy, J_Bzz], kg m^2.
    j_wheel : (3,) array
        Wheel inertias [J_Wxx, J_Wyy, J_Wzz] about the wheel axes, kg m^2.
    j_reflected : (3,) array
        Reflected inertias [J_mWxx, J_mWyy, J_mWzz] from the offset wheel
        masses, kg m^2.  The zz entry is carried for completeness but does
        not enter the airborne equations.
    geometry : WheelGeometry, optional
        When supplied, the roll/pitch reflected entries must agree with
        :func:`reflected_inertia` for the steering configuration in use
        (checked by :func:`effective_inertias`).
    """

    j_body: np.ndarray
    j_wheel: np.ndarray
    j_reflected: np.ndarray
    geometry: WheelGeometry | None = None

    def __post_init__(self):
        for name in ("j_body", "j_wheel", "j_reflected"):
            v = _vec3(getattr(self, name), name)
            if not (v > 0.0).all():
                raise InvalidParameterError(f"{name} entries must be positive, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_geometry(
        cls,
        j_body,
        j_wheel,
        geometry: WheelGeometry,
        steering: SteeringConfig,
        j_reflected_zz: float,
    ) -> "InertiaSet":
        """Build an inertia set whose roll/pitch reflected entries are
        computed from the wheel geometry at the given steering angles."""
        j_xx, j_yy = reflected_inertia(geometry, steering)
        return cls(j_body, j_wheel, np.array([j_xx, j_yy, float(j_reflected_zz)]), geometry)

    def check_geometry_consistency(
        self, steering: SteeringConfig, rtol: float = 1e-9
    ) -> None:
        """Raise if stored roll/pitch reflected inertias disagree with the
        geometry-derived values beyond ``rtol`` (no-op without geometry)."""
        if self.geometry is None:
            return
        j_xx, j_yy = reflected_inertia(self.geometry, steering)
        for stored, computed, name in (
            (self.j_reflected[0], j_xx, "J_mWxx"),
            (self.j_reflected[1], j_yy, "J_mWyy"),
        ):
            if abs(stored - computed) > rtol * max(abs(computed), 1e-300):
                raise InvalidParameterError(
                    f"{name} = {stored!r} inconsistent with geometry value "
                    f"{computed!r} at steering ({steering.delta1!r}, {steering.delta2!r})"
                )


@dataclass(frozen=True, eq=False)
class EffectiveInertias(_ArrayEqMixin):
    """Per-axis inertia constants of the simplified attitude equations.

    ``j1`` holds the divisors [J_phi1, J_theta1, J_psi1] and ``j2`` the
    Coriolis coefficients [J_phi2, J_theta2, J_psi2].  The j1 entries must be
    strictly positive; every controller divides by them.
    """

    j1: np.ndarray
    j2: np.ndarray

    def __post_init__(self):
        j1 = _vec3(self.j1, "j1")
        j2 = _vec3(self.j2, "j2")
        if not (j1 > 0.0).all():
            raise DegenerateInertiaError(f"effective inertia divisors must be positive, got {j1}")
        object.__setattr__(self, "j1", j1)
        object.__setattr__(self, "j2", j2)


def effective_inertias(inertias: InertiaSet, steering: SteeringConfig) -> EffectiveInertias:
    """Collapse body, wheel, and reflected inertias into the six constants
    of the simplified equations of motion.

        J_phi1   = J_Bxx + J_mWxx + 2 J_Wxx (cos d1 + cos d2)
        J_theta1 = J_Byy + J_mWyy + 2 J_Wxx (sin d1 + sin d2)
        J_psi1   = J_Bzz
        J_phi2   = J_Byy - J_Bzz - J_mWxx
        J_theta2 = -J_Bxx + J_Bzz - J_mWyy
        J_psi2   = J_Bxx - J_Byy

    Raises
    ------
    DegenerateInertiaError
        If any divisor comes out non-positive.
    InvalidParameterError
        If the inertia set carries a geometry that contradicts its stored
        reflected inertias at these steering angles.
    """
    inertias.check_geometry_consistency(steering)
    jb, jw, jm = inertias.j_body, inertias.j_wheel, inertias.j_reflected
    d1, d2 = steering.delta1, steering.delta2
    j1 = np.array([
        jb[0] + jm[0] + 2.0 * jw[0] * (np.cos(d1) + np.cos(d2)),
        jb[1] + jm[1] + 2.0 * jw[0] * (np.sin(d1) + np.sin(d2)),
        jb[2],
    ])
    j2 = np.array([
        jb[1] - jb[2] - jm[0],
        -jb[0] + jb[2] - jm[1],
        jb[0] - jb[1],
    ])
    return EffectiveInertias(j1, j2)


@dataclass(frozen=True, eq=False)
class BodyState(_ArrayEqMixin):
    """Attitude [phi, theta, psi] (rad) and body rates (rad/s).

    Near-hover small-rotation kinematics identify the Euler-angle rates with
    the body rates, so this is the whole 6-dimensional simulation state.
    No angle wrapping is applied: the stabilization task regulates to zero.
    """

    attitude: np.ndarray
    rate: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "attitude", _vec3(self.attitude, "attitude"))
        object.__setattr__(self, "rate", _vec3(self.rate, "rate"))

    @classmethod
    def zero(cls) -> "BodyState":
        return cls(np.zeros(3), np.zeros(3))


@dataclass(frozen=True, eq=False)
class BodyTorque(_ArrayEqMixin):
    """Torque [tau_x, tau_y, tau_z] about the body axes, N m."""

    tau: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", _vec3(self.tau, "tau"))

    @classmethod
    def zero(cls) -> "BodyTorque":
        return cls(np.zeros(3))


@dataclass(frozen=True)
class WheelTorque:
    """Wheel-pair drive torques and the common steering-joint torque, N m.

    ``tau1`` drives the 1/3 wheel pair and ``tau2`` the 2/4 pair; the
    opposite wheel of each pair receives the negated value (cross-symmetric
    application).  ``tau_delta`` is applied at all four steering joints.
    """

    tau1: float
    tau2: float
    tau_delta: float

    def __post_init__(self):
        for name in ("tau1", "tau2", "tau_delta"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.tau1, self.tau2, self.tau_delta])


def coriolis_acceleration(rate: np.ndarray, eff: EffectiveInertias) -> np.ndarray:
    """Drift term f(x, xd) of the attitude dynamics: the gyroscopic
    accelerations present with zero applied torque."""
    r = np.asarray(rate, dtype=float)
    j1, j2 = eff.j1, eff.j2
    return np.array([
        j2[0] / j1[0] * r[1] * r[2],
        j2[1] / j1[1] * r[0] * r[2],
        j2[2] / j1[2] * r[0] * r[1],
    ])


def input_gain(eff: EffectiveInertias) -> np.ndarray:
    """Diagonal of the input map g(x): acceleration per unit body torque."""
    return 1.0 / eff.j1


def angular_acceleration(
    state: BodyState, torque: BodyTorque, eff: EffectiveInertias
) -> np.ndarray:
    """Angular accelerations [phi_dd, theta_dd, psi_dd] = f(x, xd) + g(x) u."""
    return coriolis_acceleration(state.rate, eff) + input_gain(eff) * torque.tau


def torque_jacobian(steering: SteeringConfig) -> np.ndarray:
    """Map from (tau1, tau2, tau_delta) to body torques (tau_x, tau_y, tau_z).

        [[ 2 sin d1, -2 sin d2, 0],
         [-2 cos d1,  2 cos d2, 0],
         [       0,         0,  4]]

    The upper-left 2x2 block has determinant 4 sin(d1 - d2); roll/pitch
    authority vanishes when the steering angles coincide.
    """
    d1, d2 = steering.delta1, steering.delta2
    return np.array([
        [2.0 * np.sin(d1), -2.0 * np.sin(d2), 0.0],
        [-2.0 * np.cos(d1), 2.0 * np.cos(d2), 0.0],
        [0.0, 0.0, 4.0],
    ])


def allocate_wheel_torques(
    body: BodyTorque, steering: SteeringConfig, tol: float = SINGULARITY_TOL
) -> WheelTorque:
    """Invert :func:`torque_jacobian`: wheel and steering torques realizing a
    requested body torque.

    Yaw decouples (tau_delta = tau_z / 4); roll and pitch come from the 2x2
    solve, which requires |sin(d1 - d2)| >= ``tol``.

    Raises
    ------
    AllocationSingularityError
        If the steering configuration is singular at tolerance ``tol``.
    """
    if steering.is_singular(tol):
        raise AllocationSingularityError(steering.delta1, steering.delta2, tol)
    jac = torque_jacobian(steering)
    tau12 = np.linalg.solve(jac[:2, :2], body.tau[:2])
    return WheelTorque(tau12[0], tau12[1], body.tau[2] / 4.0)
