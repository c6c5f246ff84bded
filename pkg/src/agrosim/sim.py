"""Closed-loop simulation: fixed-step RK4, saturation, disturbances, metrics.

A scenario couples the airborne dynamics with one of the two controllers and
integrates the augmented state [attitude, rate, L_hat] with classical RK4 at
a fixed step.  The control law and the deterministic disturbance component
are evaluated at every integrator stage, so the scheme keeps its fourth-order
convergence against the continuous closed loop; the Gaussian noise component
is sampled once per step and held across stages to keep runs reproducible
and refinement studies meaningful.

Runs are deterministic: identical configuration (including the disturbance
seed) produces bit-identical trajectories and CSV output.  All state is
scenario-local, so independent scenarios can execute in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, IO, Optional, Union

import numpy as np

from .control import (
    BsGains,
    FlGains,
    Reference,
    _adaptation_rate,
    _bs_torque,
    _bs_velocity_error,
    _fl_torque,
)
from .dynamics import (
    BodyState,
    BodyTorque,
    InertiaSet,
    SteeringConfig,
    _ArrayEqMixin,
    _vec3,
    allocate_wheel_torques,
    effective_inertias,
    torque_jacobian,
)
from .errors import (
    DisturbanceBudgetError,
    DivergenceError,
    InvalidParameterError,
    InvalidWindowError,
)

#: Fractions of the torque limit that the three disturbance components may
#: use: offset, sine amplitude, and the 3-sigma extent of the noise.
OFFSET_BUDGET = 0.20
SINE_BUDGET = 0.20
NOISE_BUDGET = 0.05

#: Default settling band: +/-2 degrees about the reference.
DEFAULT_SETTLE_BAND = np.deg2rad(2.0)

_BUDGET_SLACK = 1.0 + 1e-12  # absorb rounding when a spec sits exactly on budget


@dataclass(frozen=True, eq=False)
class DisturbanceSpec(_ArrayEqMixin):
    """Torque disturbance: constant offset + sinusoid + Gaussian noise.

    Each component is a per-axis 3-vector in N m; the sinusoid shares one
    frequency (rad/s) with per-axis phases.  ``seed`` fixes the noise
    streams, one independent stream per axis.
    """

    offset: np.ndarray
    sine_amp: np.ndarray
    sine_freq: float
    sine_phase: np.ndarray
    noise_sigma: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "offset", _vec3(self.offset, "offset"))
        object.__setattr__(self, "sine_amp", _vec3(self.sine_amp, "sine_amp"))
        object.__setattr__(self, "sine_phase", _vec3(self.sine_phase, "sine_phase"))
        sigma = _vec3(self.noise_sigma, "noise_sigma")
        if (sigma < 0.0).any():
            raise InvalidParameterError(f"noise_sigma must be non-negative, got {sigma}")
        object.__setattr__(self, "noise_sigma", sigma)
        freq = float(self.sine_freq)
        if not (np.isfinite(freq) and freq >= 0.0):
            raise InvalidParameterError(f"sine_freq must be non-negative, got {freq}")
        object.__setattr__(self, "sine_freq", freq)
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def zero(cls, seed: int = 0) -> "DisturbanceSpec":
        return cls(np.zeros(3), np.zeros(3), 0.0, np.zeros(3), np.zeros(3), seed)

    def deterministic(self, t: float) -> np.ndarray:
        """Offset plus sinusoid at time ``t`` (no noise)."""
        return self.offset + self.sine_amp * np.sin(self.sine_freq * t + self.sine_phase)


def check_disturbance_budget(spec: DisturbanceSpec, u_max: float) -> None:
    """Enforce the 20/20/5 percent decomposition of the torque budget.

    Raises
    ------
    DisturbanceBudgetError
        Naming the offending component and its bound.
    """
    checks = (
        ("offset", np.abs(spec.offset).max(), OFFSET_BUDGET),
        ("sine_amp", np.abs(spec.sine_amp).max(), SINE_BUDGET),
        ("3*noise_sigma", 3.0 * spec.noise_sigma.max(), NOISE_BUDGET),
    )
    for name, value, frac in checks:
        bound = frac * u_max
        if value > bound * _BUDGET_SLACK:
            raise DisturbanceBudgetError(
                f"disturbance {name} = {value:g} N m exceeds {frac:.0%} of "
                f"u_max ({bound:g} N m)"
            )


class NoiseStreams:
    """Three independent per-axis Gaussian streams behind one seed."""

    def __init__(self, seed: int):
        self._gens = [np.random.default_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(3)]

    def draw(self) -> np.ndarray:
        """One standard-normal sample per axis (scale by sigma at the caller)."""
        return np.array([g.standard_normal() for g in self._gens])


def disturbance_torque(
    spec: DisturbanceSpec, t: float, streams: Optional[NoiseStreams] = None
) -> np.ndarray:
    """Disturbance torque sample at time ``t``.

    When ``streams`` is given, one Gaussian value per axis is drawn and
    scaled by ``noise_sigma``; the caller is responsible for drawing exactly
    once per integration step and holding the value across stages.
    """
    if t < 0.0:
        raise InvalidParameterError(f"t must be non-negative, got {t}")
    tau = spec.deterministic(t)
    if streams is not None:
        tau = tau + spec.noise_sigma * streams.draw()
    return tau


def saturate(u: Union[BodyTorque, np.ndarray], u_max: float) -> Union[BodyTorque, np.ndarray]:
    """Per-axis clamp of a body torque to [-u_max, +u_max]."""
    if not u_max > 0.0:
        raise InvalidParameterError(f"u_max must be positive, got {u_max}")
    if isinstance(u, BodyTorque):
        return BodyTorque(np.clip(u.tau, -u_max, u_max))
    return np.clip(np.asarray(u, dtype=float), -u_max, u_max)


#: Controller identifiers accepted by :class:`ScenarioConfig`.
CONTROLLER_FL = "fl"
CONTROLLER_BS = "backstepping"


@dataclass(frozen=True, eq=False)
class ScenarioConfig(_ArrayEqMixin):
    """Everything one closed-loop run depends on.

    ``u_max = math.inf`` disables saturation.  ``adaptation_enabled`` only
    makes sense for the backstepping controller and requires BsGains; the
    FL controller requires FlGains.
    """

    inertias: InertiaSet
    steering: SteeringConfig
    initial: BodyState
    reference: Reference
    controller: str
    gains: Union[FlGains, BsGains]
    u_max: float
    dt: float = 1e-3
    horizon: float = 1.5
    disturbance: Optional[DisturbanceSpec] = None
    adaptation_enabled: bool = False

    def __post_init__(self):
        if self.controller not in (CONTROLLER_FL, CONTROLLER_BS):
            raise InvalidParameterError(
                f"controller must be {CONTROLLER_FL!r} or {CONTROLLER_BS!r}, "
                f"got {self.controller!r}"
            )
        expected = FlGains if self.controller == CONTROLLER_FL else BsGains
        if not isinstance(self.gains, expected):
            raise InvalidParameterError(
                f"{self.controller!r} controller needs {expected.__name__}, "
                f"got {type(self.gains).__name__}"
            )
        if self.adaptation_enabled and self.controller != CONTROLLER_BS:
            raise InvalidParameterError("adaptation requires the backstepping controller")
        u_max = float(self.u_max)
        if math.isnan(u_max) or not u_max > 0.0:
            raise InvalidParameterError(f"u_max must be positive, got {u_max}")
        dt = float(self.dt)
        if not (np.isfinite(dt) and dt > 0.0):
            raise InvalidParameterError(f"dt must be positive, got {dt}")
        horizon = float(self.horizon)
        if not (np.isfinite(horizon) and horizon >= dt):
            raise InvalidParameterError(f"horizon must be >= dt, got {horizon}")
        object.__setattr__(self, "u_max", u_max)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "horizon", horizon)
        if self.disturbance is not None and np.isfinite(u_max):
            check_disturbance_budget(self.disturbance, u_max)

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


#: Signature of a custom torque law: (attitude, rate, l_hat) -> torque (3,).
TorqueLaw = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class _ClosedLoop:
    """Precomputed arrays + stage derivative for one scenario."""

    def __init__(self, config: ScenarioConfig, torque_law: Optional[TorqueLaw] = None):
        self.config = config
        self.eff = effective_inertias(config.inertias, config.steering)
        self.j1 = self.eff.j1
        self.j2 = self.eff.j2
        self.g = 1.0 / self.j1
        ref = config.reference
        self.x_d, self.xd_dot, self.xd_ddot = ref.x_d, ref.xd_dot, ref.xd_ddot
        self.u_max = config.u_max
        self.adapt = config.adaptation_enabled
        gains = config.gains
        if torque_law is not None:
            self.torque = torque_law
        elif config.controller == CONTROLLER_FL:
            self.torque = lambda att, rate, l_hat: _fl_torque(
                att, rate, self.x_d, self.xd_dot, self.xd_ddot,
                gains.k1, gains.k2, self.j1, self.j2)
        else:
            self.torque = lambda att, rate, l_hat: _bs_torque(
                att, rate, self.x_d, self.xd_dot, self.xd_ddot, l_hat,
                gains.k1, gains.k2, gains.gamma, gains.lam, self.j1, self.j2)
        if self.adapt:
            self._lam, self._sigma, self._k1 = gains.lam, gains.sigma, gains.k1
        dist = config.disturbance
        self.dist_torque = dist.deterministic if dist is not None else None

    def command(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.torque(y[0:3], y[3:6], y[6:9]), dtype=float)

    def derivative(self, t: float, y: np.ndarray, noise: np.ndarray) -> np.ndarray:
        att, rate, l_hat = y[0:3], y[3:6], y[6:9]
        u = np.clip(self.torque(att, rate, l_hat), -self.u_max, self.u_max)
        tau = u + noise if self.dist_torque is None else u + self.dist_torque(t) + noise
        dy = np.empty(9)
        dy[0:3] = rate
        dy[3] = self.j2[0] / self.j1[0] * rate[1] * rate[2] + self.g[0] * tau[0]
        dy[4] = self.j2[1] / self.j1[1] * rate[0] * rate[2] + self.g[1] * tau[1]
        dy[5] = self.j2[2] / self.j1[2] * rate[0] * rate[1] + self.g[2] * tau[2]
        if self.adapt:
            e2 = _bs_velocity_error(att, rate, self.x_d, self.xd_dot, self._k1)
            dy[6:9] = _adaptation_rate(e2, self._lam, self._sigma)
        else:
            dy[6:9] = 0.0
        return dy

    def rk4_step(self, t: float, y: np.ndarray, noise: np.ndarray) -> np.ndarray:
        dt = self.config.dt
        k1 = self.derivative(t, y, noise)
        k2 = self.derivative(t + dt / 2.0, y + dt / 2.0 * k1, noise)
        k3 = self.derivative(t + dt / 2.0, y + dt / 2.0 * k2, noise)
        k4 = self.derivative(t + dt, y + dt * k3, noise)
        return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(
    aug_state: np.ndarray,
    config: ScenarioConfig,
    t: float,
    noise: Optional[np.ndarray] = None,
    torque_law: Optional[TorqueLaw] = None,
) -> np.ndarray:
    """One classical RK4 step of the augmented state [attitude, rate, L_hat].

    The control law is evaluated (and clamped) at every stage; the Gaussian
    disturbance contribution, if any, must be pre-sampled into ``noise`` and
    is held across the four stages.  ``torque_law`` substitutes an arbitrary
    torque function for the configured controller, which is handy for
    open-loop and oracle tests.
    """
    y = np.asarray(aug_state, dtype=float)
    if y.shape != (9,):
        raise InvalidParameterError(f"augmented state must have shape (9,), got {y.shape}")
    loop = _ClosedLoop(config, torque_law)
    noise_vec = np.zeros(3) if noise is None else np.asarray(noise, dtype=float)
    return loop.rk4_step(t, y, noise_vec)


_CSV_COLUMNS = (
    "t,phi,theta,psi,phi_dot,theta_dot,psi_dot,"
    "u1_cmd,u2_cmd,u3_cmd,u1_sat,u2_sat,u3_sat,"
    "tau1,tau2,tau_delta,L1,L2,L3,Lhat1,Lhat2,Lhat3,V1,V2"
)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord(_ArrayEqMixin):
    """Time-indexed log of one closed-loop run.

    All series share the same length and a strictly uniform time grid.
    Angles and rates are stored in radians; :meth:`to_csv` converts to
    degrees for the on-disk convention.  ``v2`` is NaN for FL runs, where
    the backstepping Lyapunov function is not defined.
    """

    t: np.ndarray
    attitude: np.ndarray
    rate: np.ndarray
    u_cmd: np.ndarray
    u_sat: np.ndarray
    wheel: np.ndarray
    l_true: np.ndarray
    l_hat: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    reference: Reference

    def __post_init__(self):
        t = np.array(self.t, dtype=float)  # copies: the record freezes its arrays
        n = t.shape[0]
        if n < 2:
            raise InvalidParameterError("a trajectory needs at least two samples")
        steps = np.diff(t)
        if (steps <= 0.0).any():
            raise InvalidParameterError("time grid must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15):
            raise InvalidParameterError("time grid must have a constant step")
        object.__setattr__(self, "t", t)
        for name, width in (
            ("attitude", 3), ("rate", 3), ("u_cmd", 3), ("u_sat", 3),
            ("wheel", 3), ("l_true", 3), ("l_hat", 3), ("v1", 1), ("v2", 1),
        ):
            arr = np.array(getattr(self, name), dtype=float)
            want = (n,) if width == 1 else (n, width)
            if arr.shape != want:
                raise InvalidParameterError(f"{name} must have shape {want}, got {arr.shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        t.flags.writeable = False

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def error(self) -> np.ndarray:
        """Per-sample attitude error x_d - x, radians."""
        return self.reference.x_d[None, :] - self.attitude

    def to_csv(self, target: Union[str, IO[str]]) -> None:
        """Write the record as CSV (angles in degrees, full precision).

        Column units: t [s]; phi..psi [deg]; phi_dot..psi_dot [deg/s];
        torque columns [N m]; L/Lhat [rad/s^2]; V1, V2 dimensionless.
        """
        data = np.column_stack([
            self.t,
            np.rad2deg(self.attitude),
            np.rad2deg(self.rate),
            self.u_cmd,
            self.u_sat,
            self.wheel,
            self.l_true,
            self.l_hat,
            self.v1,
            self.v2,
        ])
        lines = [_CSV_COLUMNS]
        lines.extend(",".join(f"{x:.17g}" for x in row) for row in data)
        text = "\n".join(lines) + "\n"
        if isinstance(target, str):
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            target.write(text)


@dataclass(frozen=True, eq=False)
class Metrics(_ArrayEqMixin):
    """Summary numbers of a run.

    ``settle_time`` is per axis, NaN when the axis never enters and stays in
    the band; ``peak_torque`` is the largest applied |torque| per axis;
    ``est_error_rms`` is the RMS disturbance-estimate error over the tail
    window; ``final_error`` is the signed attitude error at the horizon.
    """

    settle_time: np.ndarray
    peak_torque: np.ndarray
    est_error_rms: float
    final_error: np.ndarray
    settle_band: float

    def to_dict(self) -> dict:
        def _clean(v):
            return None if math.isnan(v) else v

        return {
            "settle_time_s": [_clean(float(v)) for v in self.settle_time],
            "peak_torque_nm": [float(v) for v in self.peak_torque],
            "est_error_rms": _clean(float(self.est_error_rms)),
            "final_error_rad": [float(v) for v in self.final_error],
            "settle_band_rad": float(self.settle_band),
        }


def settle_time(record: TrajectoryRecord, band: float = DEFAULT_SETTLE_BAND) -> np.ndarray:
    """Earliest time per axis after which |error| stays within ``band``.

    Returns NaN for an axis that has not settled by the end of the record
    ("enter and stay" semantics: one late excursion resets the clock).
    """
    if not band > 0.0:
        raise InvalidParameterError(f"band must be positive, got {band}")
    err = np.abs(record.error())
    out = np.full(3, np.nan)
    for axis in range(3):
        outside = np.nonzero(err[:, axis] > band)[0]
        idx = 0 if outside.size == 0 else outside[-1] + 1
        if idx < len(record):
            out[axis] = record.t[idx]
    return out


def estimate_error_metrics(record: TrajectoryRecord, window: tuple[float, float]) -> float:
    """RMS of ||L_true - L_hat|| over samples with t in ``window``.

    ``L_true`` is the acceleration-domain image of the injected torque
    disturbance, so the number compares like with like against the estimate.

    Raises
    ------
    InvalidWindowError
        If the window is empty, reversed, or beyond the recorded horizon.
    """
    t0, t1 = float(window[0]), float(window[1])
    if not t0 < t1:
        raise InvalidWindowError(f"window must satisfy t0 < t1, got [{t0}, {t1}]")
    if t1 > record.t[-1] * (1.0 + 1e-12) + 1e-15:
        raise InvalidWindowError(
            f"window end {t1} exceeds recorded horizon {record.t[-1]}"
        )
    mask = (record.t >= t0) & (record.t <= t1)
    if not mask.any():
        raise InvalidWindowError(f"window [{t0}, {t1}] contains no samples")
    err = record.l_true[mask] - record.l_hat[mask]
    return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))


def compute_metrics(
    record: TrajectoryRecord,
    band: float = DEFAULT_SETTLE_BAND,
    tail_window: Optional[tuple[float, float]] = None,
) -> Metrics:
    """Standard metrics bundle; the tail window defaults to the last third
    of the horizon."""
    if tail_window is None:
        t_end = float(record.t[-1])
        tail_window = (t_end * 2.0 / 3.0, t_end)
    return Metrics(
        settle_time=settle_time(record, band),
        peak_torque=np.abs(record.u_sat).max(axis=0),
        est_error_rms=estimate_error_metrics(record, tail_window),
        final_error=record.error()[-1],
        settle_band=float(band),
    )


def run_scenario(
    config: ScenarioConfig, settle_band: float = DEFAULT_SETTLE_BAND
) -> tuple[TrajectoryRecord, Metrics]:
    """Roll out a scenario and summarize it.

    Per step: evaluate + clamp the control, sample the disturbance, advance
    the augmented state one RK4 step (stage-evaluated control and
    deterministic disturbance, held noise), and record everything.  Wheel
    torques realizing the applied body torque are logged for diagnostics.

    Raises
    ------
    AllocationSingularityError
        If wheel torques cannot be allocated at this steering configuration.
    DivergenceError
        If the state leaves the finite range, naming the failing step.
    """
    loop = _ClosedLoop(config)
    # fail fast: the wheel-torque log needs an invertible steering map
    allocate_wheel_torques(BodyTorque.zero(), config.steering)

    n = config.n_steps
    dt = config.dt
    dist = config.disturbance
    streams = NoiseStreams(dist.seed) if dist is not None else None

    t_grid = np.arange(n + 1) * dt
    att = np.empty((n + 1, 3))
    rate = np.empty((n + 1, 3))
    u_cmd = np.empty((n + 1, 3))
    u_sat = np.empty((n + 1, 3))
    l_true = np.zeros((n + 1, 3))
    l_hat = np.zeros((n + 1, 3))

    y = np.concatenate([config.initial.attitude, config.initial.rate, np.zeros(3)])
    for k in range(n + 1):
        t = t_grid[k]
        att[k] = y[0:3]
        rate[k] = y[3:6]
        l_hat[k] = y[6:9]
        cmd = loop.command(y)
        u_cmd[k] = cmd
        u_sat[k] = np.clip(cmd, -config.u_max, config.u_max)
        noise = np.zeros(3)
        if dist is not None:
            noise = dist.noise_sigma * streams.draw()
            l_true[k] = loop.g * (dist.deterministic(t) + noise)
        if k < n:
            y = loop.rk4_step(t, y, noise)
            if not np.isfinite(y).all():
                raise DivergenceError(step=k + 1, t=t + dt)

    # wheel torques realizing the applied body torque, vectorized over rows
    jac = torque_jacobian(config.steering)
    wheel = np.empty((n + 1, 3))
    wheel[:, :2] = np.linalg.solve(jac[:2, :2], u_sat[:, :2].T).T
    wheel[:, 2] = u_sat[:, 2] / 4.0

    e1 = config.reference.x_d[None, :] - att
    v1 = 0.5 * np.sum(e1 * e1, axis=1)
    if config.controller == CONTROLLER_BS:
        g = config.gains
        e2 = (config.reference.xd_dot[None, :] - rate) + g.k1[None, :] * e1
        l_err = l_true - l_hat
        v2 = 0.5 * (
            np.sum(e1 * (g.gamma[None, :] * e1), axis=1)
            + np.sum(e2 * (g.lam[None, :] * e2), axis=1)
            + np.sum(l_err * (g.sigma[None, :] * l_err), axis=1)
        )
    else:
        v2 = np.full(n + 1, np.nan)

    record = TrajectoryRecord(
        t=t_grid, attitude=att, rate=rate, u_cmd=u_cmd, u_sat=u_sat, wheel=wheel,
        l_true=l_true, l_hat=l_hat, v1=v1, v2=v2, reference=config.reference,
    )
    return record, compute_metrics(record, band=settle_band)
