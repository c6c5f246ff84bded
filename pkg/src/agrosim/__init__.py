"""Airborne attitude stabilization of a 4WIDS robot: dynamics, controllers,
and a deterministic closed-loop simulator.

The package splits along the problem structure:

- :mod:`agrosim.dynamics` -- rigid-body attitude equations, inertia
  bookkeeping, and the wheel-torque Jacobian maps.
- :mod:`agrosim.control` -- PD + feedback-linearization and adaptive
  backstepping control laws, Lyapunov diagnostics, double-integrator LQR.
- :mod:`agrosim.sim` -- fixed-step RK4 closed loop with torque saturation,
  disturbance injection, trajectory recording, and metrics.
- :mod:`agrosim.presets` / :mod:`agrosim.config` -- named reference
  scenarios and the JSON configuration schema.
- :mod:`agrosim.cli` -- the ``agrosim`` command (run / compare / sweep).
"""

from .control import (
    AdaptState,
    BsGains,
    FlGains,
    LqrGains,
    LyapunovSample,
    Reference,
    adapt_update,
    adaptation_rate,
    bs_control,
    bs_velocity_error,
    bs_virtual_control,
    fl_control,
    lqr_double_integrator,
    lyapunov_sample,
)
from .dynamics import (
    SINGULARITY_TOL,
    BodyState,
    BodyTorque,
    EffectiveInertias,
    InertiaSet,
    SteeringConfig,
    WheelGeometry,
    WheelTorque,
    allocate_wheel_torques,
    angular_acceleration,
    coriolis_acceleration,
    effective_inertias,
    input_gain,
    reflected_inertia,
    torque_jacobian,
)
from .errors import (
    AgroSimError,
    AllocationSingularityError,
    ComparisonInvalidError,
    ConfigError,
    DegenerateInertiaError,
    DisturbanceBudgetError,
    DivergenceError,
    InvalidParameterError,
    InvalidWindowError,
)
from .config import load_config, parse_config, serialize_config
from .presets import preset, preset_names
from .sim import (
    DEFAULT_SETTLE_BAND,
    DisturbanceSpec,
    Metrics,
    NoiseStreams,
    ScenarioConfig,
    TrajectoryRecord,
    check_disturbance_budget,
    compute_metrics,
    disturbance_torque,
    estimate_error_metrics,
    run_scenario,
    saturate,
    settle_time,
    step_rk4,
)

__version__ = "0.1.0"
