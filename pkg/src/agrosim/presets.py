"""Named scenario presets.

``fl-paper`` and ``bs-paper`` reproduce the reference airborne-recovery
comparison: isotropic steering, a throw-like initial attitude of
[-22.5, +22.5, 0] degrees, zero reference, a +/-32.1521 N m torque limit,
and the published gain sets.  ``bs-adaptive-paper`` adds the disturbance
study: softer backstepping gains, the adaptation law enabled, and an
offset + 2 rad/s sine + Gaussian noise disturbance inside the 20/20/5
percent budget.
"""

from __future__ import annotations

import numpy as np

from .control import BsGains, FlGains, Reference
from .dynamics import BodyState, InertiaSet, SteeringConfig
from .errors import ConfigError
from .sim import DisturbanceSpec, ScenarioConfig

#: Torque limit shared by all presets, N m.
PAPER_U_MAX = 32.1521

#: Published per-axis FL gains (velocity, position).
PAPER_FL_K1 = 19.9977
PAPER_FL_K2 = 122.6497

DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 1.5
DEFAULT_SEED = 42


def paper_inertias() -> InertiaSet:
    """Chassis, wheel, and reflected inertias of the reference robot."""
    return InertiaSet(
        j_body=np.array([0.662, 0.940, 1.448]),
        j_wheel=np.array([0.006565, 0.011689, 0.006565]),
        j_reflected=np.array([0.3055, 0.4103, 0.7158]),
    )


def paper_initial_state() -> BodyState:
    return BodyState(np.deg2rad([-22.5, 22.5, 0.0]), np.zeros(3))


def _base_kwargs(dt: float, horizon: float) -> dict:
    return dict(
        inertias=paper_inertias(),
        steering=SteeringConfig.isotropic(),
        initial=paper_initial_state(),
        reference=Reference.zero(),
        u_max=PAPER_U_MAX,
        dt=dt,
        horizon=horizon,
    )


def default_disturbance(u_max: float = PAPER_U_MAX, seed: int = DEFAULT_SEED) -> DisturbanceSpec:
    """Offset + 2 rad/s sine at 15% of the limit each, noise sigma at
    u_max/60 so the 3-sigma extent sits on the 5% budget line."""
    return DisturbanceSpec(
        offset=np.full(3, 0.15 * u_max),
        sine_amp=np.full(3, 0.15 * u_max),
        sine_freq=2.0,
        sine_phase=np.zeros(3),
        noise_sigma=np.full(3, u_max / 60.0),
        seed=seed,
    )


def fl_paper(dt: float = DEFAULT_DT, horizon: float = DEFAULT_HORIZON) -> ScenarioConfig:
    """PD + feedback linearization with the published LQR-derived gains."""
    return ScenarioConfig(
        controller="fl",
        gains=FlGains.from_scalars(PAPER_FL_K1, PAPER_FL_K2),
        **_base_kwargs(dt, horizon),
    )


def bs_paper(dt: float = DEFAULT_DT, horizon: float = DEFAULT_HORIZON) -> ScenarioConfig:
    """Backstepping with the aggressive comparison gains (K1=20, K2=1800),
    adaptation off: the estimate stays frozen at zero."""
    return ScenarioConfig(
        controller="backstepping",
        gains=BsGains.from_scalars(20.0, 1800.0, gamma=1.0, lam=1.0, sigma=1.0),
        adaptation_enabled=False,
        **_base_kwargs(dt, horizon),
    )


def bs_adaptive_paper(
    dt: float = DEFAULT_DT,
    horizon: float = DEFAULT_HORIZON,
    seed: int = DEFAULT_SEED,
) -> ScenarioConfig:
    """Adaptive backstepping under the budgeted disturbance (K1=10, K2=200,
    Sigma=0.0005)."""
    return ScenarioConfig(
        controller="backstepping",
        gains=BsGains.from_scalars(10.0, 200.0, gamma=1.0, lam=1.0, sigma=0.0005),
        adaptation_enabled=True,
        disturbance=default_disturbance(PAPER_U_MAX, seed),
        **_base_kwargs(dt, horizon),
    )


_PRESETS = {
    "fl-paper": fl_paper,
    "bs-paper": bs_paper,
    "bs-adaptive-paper": bs_adaptive_paper,
}


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESETS)


def preset(name: str, **overrides) -> ScenarioConfig:
    """Look up a preset by name.

    Keyword overrides are forwarded to the builder (``dt``, ``horizon``, and
    ``seed`` where applicable).

    Raises
    ------
    ConfigError
        For an unknown preset name.
    """
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(_PRESETS)}"
        ) from None
    return builder(**overrides)
