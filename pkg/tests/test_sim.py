import dataclasses
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agrosim import (
    AllocationSingularityError,
    BodyState,
    BodyTorque,
    BsGains,
    DisturbanceBudgetError,
    DisturbanceSpec,
    DivergenceError,
    FlGains,
    InvalidParameterError,
    InvalidWindowError,
    NoiseStreams,
    Reference,
    ScenarioConfig,
    SteeringConfig,
    TrajectoryRecord,
    check_disturbance_budget,
    disturbance_torque,
    estimate_error_metrics,
    run_scenario,
    saturate,
    settle_time,
    step_rk4,
    torque_jacobian,
)
from agrosim.presets import (
    PAPER_U_MAX,
    bs_adaptive_paper,
    bs_paper,
    fl_paper,
    paper_inertias,
)

ISO = SteeringConfig.isotropic()


def _plain_config(**overrides) -> ScenarioConfig:
    base = dict(
        inertias=paper_inertias(),
        steering=ISO,
        initial=BodyState.zero(),
        reference=Reference.zero(),
        controller="fl",
        gains=FlGains.from_scalars(19.9977, 122.6497),
        u_max=PAPER_U_MAX,
        dt=1e-3,
        horizon=0.05,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def _record_from_error(t, err, reference=None):
    """Synthetic record with a prescribed per-axis error history."""
    n = len(t)
    reference = reference or Reference.zero()
    att = reference.x_d[None, :] - np.asarray(err, dtype=float)
    zeros = np.zeros((n, 3))
    return TrajectoryRecord(
        t=np.asarray(t, dtype=float), attitude=att, rate=zeros, u_cmd=zeros,
        u_sat=zeros, wheel=zeros, l_true=zeros, l_hat=zeros,
        v1=np.zeros(n), v2=np.zeros(n), reference=reference,
    )


# ---------------------------------------------------------------------------
# disturbance model
# ---------------------------------------------------------------------------

def test_disturbance_all_zero():
    spec = DisturbanceSpec.zero()
    for t in (0.0, 0.3, 2.0):
        assert (disturbance_torque(spec, t) == 0.0).all()


def test_disturbance_offset_only():
    spec = DisturbanceSpec(np.array([1.0, 0.0, 0.0]), np.zeros(3), 0.0,
                           np.zeros(3), np.zeros(3), seed=0)
    np.testing.assert_array_equal(disturbance_torque(spec, 5.0), [1.0, 0.0, 0.0])


def test_disturbance_sine_quarter_period():
    spec = DisturbanceSpec(np.zeros(3), np.array([0.0, 2.0, 0.0]), 2.0,
                           np.zeros(3), np.zeros(3), seed=0)
    np.testing.assert_allclose(
        disturbance_torque(spec, np.pi / 4.0), [0.0, 2.0, 0.0], atol=1e-15
    )


def test_disturbance_noise_deterministic_per_seed():
    spec = DisturbanceSpec(np.zeros(3), np.zeros(3), 0.0, np.zeros(3),
                           np.ones(3), seed=123)
    a = [disturbance_torque(spec, 0.0, NoiseStreams(123)) for _ in range(1)]
    b = [disturbance_torque(spec, 0.0, NoiseStreams(123)) for _ in range(1)]
    np.testing.assert_array_equal(a, b)
    other = disturbance_torque(spec, 0.0, NoiseStreams(124))
    assert not np.array_equal(a[0], other)


def test_noise_streams_are_per_axis_independent():
    s1, s2 = NoiseStreams(9), NoiseStreams(9)
    seq1 = np.array([s1.draw() for _ in range(50)])
    seq2 = np.array([s2.draw() for _ in range(50)])
    np.testing.assert_array_equal(seq1, seq2)
    # distinct axis streams: columns differ
    assert not np.array_equal(seq1[:, 0], seq1[:, 1])


def test_budget_boundaries():
    u = PAPER_U_MAX
    ok = DisturbanceSpec(np.full(3, 0.20 * u), np.full(3, 0.20 * u), 2.0,
                         np.zeros(3), np.full(3, u / 60.0), seed=0)
    check_disturbance_budget(ok, u)  # exactly on budget is allowed
    with pytest.raises(DisturbanceBudgetError):
        check_disturbance_budget(
            dataclasses.replace(ok, offset=np.full(3, 0.21 * u)), u)
    with pytest.raises(DisturbanceBudgetError):
        check_disturbance_budget(
            dataclasses.replace(ok, sine_amp=np.full(3, 0.5 * u)), u)
    with pytest.raises(DisturbanceBudgetError):
        check_disturbance_budget(
            dataclasses.replace(ok, noise_sigma=np.full(3, 0.02 * u)), u)


# ---------------------------------------------------------------------------
# saturation
# ---------------------------------------------------------------------------

def test_saturate_examples():
    u_max = PAPER_U_MAX
    np.testing.assert_array_equal(
        saturate(np.array([10.0, -10.0, 0.0]), u_max), [10.0, -10.0, 0.0])
    np.testing.assert_array_equal(
        saturate(np.array([100.0, 0.0, 0.0]), u_max), [u_max, 0.0, 0.0])
    np.testing.assert_array_equal(
        saturate(np.array([-40.0, 40.0, -40.0]), u_max), [-u_max, u_max, -u_max])
    out = saturate(BodyTorque(np.array([100.0, 0.0, 0.0])), u_max)
    assert isinstance(out, BodyTorque)
    assert out.tau[0] == u_max


@given(u=st.tuples(*[st.floats(-1e6, 1e6) for _ in range(3)]),
       u_max=st.floats(1e-3, 1e3))
@settings(max_examples=200)
def test_saturate_clamp_property(u, u_max):
    out = saturate(np.array(u), u_max)
    assert (np.abs(out) <= u_max).all()
    untouched = np.abs(np.array(u)) <= u_max
    np.testing.assert_array_equal(out[untouched], np.array(u)[untouched])


def test_saturate_rejects_bad_limit():
    with pytest.raises(InvalidParameterError):
        saturate(np.zeros(3), 0.0)


# ---------------------------------------------------------------------------
# scenario configuration
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(InvalidParameterError):
        _plain_config(u_max=-1.0)
    with pytest.raises(InvalidParameterError):
        _plain_config(dt=0.0)
    with pytest.raises(InvalidParameterError):
        _plain_config(horizon=1e-4)  # horizon < dt
    with pytest.raises(InvalidParameterError):
        _plain_config(controller="pid")
    with pytest.raises(InvalidParameterError):
        _plain_config(gains=BsGains.from_scalars(1.0, 1.0))  # fl needs FlGains
    with pytest.raises(InvalidParameterError):
        _plain_config(adaptation_enabled=True)  # fl cannot adapt
    with pytest.raises(DisturbanceBudgetError):
        _plain_config(disturbance=DisturbanceSpec(
            np.full(3, 0.5 * PAPER_U_MAX), np.zeros(3), 0.0, np.zeros(3),
            np.zeros(3), seed=0))


def test_config_allows_unlimited_torque():
    cfg = _plain_config(u_max=np.inf)
    rec, _ = run_scenario(cfg)
    np.testing.assert_array_equal(rec.u_cmd, rec.u_sat)


# ---------------------------------------------------------------------------
# single RK4 step
# ---------------------------------------------------------------------------

def test_step_zero_dynamics_is_identity():
    cfg = _plain_config()
    y = np.zeros(9)
    out = step_rk4(y, cfg, 0.0)
    np.testing.assert_array_equal(out, y)


def test_step_constant_torque_matches_kinematics():
    # a constant roll torque with the other rates at zero is an exact double
    # integrator; RK4 integrates the quadratic exactly
    cfg = _plain_config(u_max=1e6)
    j1 = 0.662 + 0.3055 + 2.0 * 0.006565 * np.sqrt(2.0)
    tau = 3.7
    y0 = np.zeros(9)
    y0[0] = 0.25  # initial roll angle
    out = step_rk4(y0, cfg, 0.0, torque_law=lambda att, rate, l_hat: np.array([tau, 0.0, 0.0]))
    dt = cfg.dt
    acc = tau / j1
    assert out[0] == pytest.approx(0.25 + 0.5 * acc * dt * dt, rel=1e-14)
    assert out[3] == pytest.approx(acc * dt, rel=1e-14)
    assert (out[[1, 2, 4, 5]] == 0.0).all()
    assert (out[6:] == 0.0).all()


def test_step_rejects_bad_state_shape():
    with pytest.raises(InvalidParameterError):
        step_rk4(np.zeros(6), _plain_config(), 0.0)


# ---------------------------------------------------------------------------
# full scenarios
# ---------------------------------------------------------------------------

def test_equilibrium_regression_exact_zero():
    cfg = _plain_config(horizon=0.25)
    rec, metrics = run_scenario(cfg)
    assert (rec.attitude == 0.0).all()
    assert (rec.rate == 0.0).all()
    assert (rec.u_cmd == 0.0).all()
    assert (rec.u_sat == 0.0).all()
    assert (rec.wheel == 0.0).all()
    np.testing.assert_array_equal(metrics.settle_time, 0.0)


def test_runs_are_bit_deterministic():
    cfg = bs_adaptive_paper(horizon=0.4)
    rec_a, _ = run_scenario(cfg)
    rec_b, _ = run_scenario(cfg)
    for name in ("t", "attitude", "rate", "u_cmd", "u_sat", "wheel",
                 "l_true", "l_hat", "v1", "v2"):
        np.testing.assert_array_equal(getattr(rec_a, name), getattr(rec_b, name))


def test_saturation_respected_everywhere():
    for cfg in (fl_paper(), bs_paper()):
        rec, _ = run_scenario(cfg)
        assert (np.abs(rec.u_sat) <= cfg.u_max).all()
        # commanded torque genuinely exceeds the limit early in the recovery
        assert np.abs(rec.u_cmd).max() > cfg.u_max


def test_wheel_allocation_consistency():
    cfg = bs_paper(horizon=0.5)
    rec, _ = run_scenario(cfg)
    jac = torque_jacobian(cfg.steering)
    recovered = rec.wheel @ jac.T
    np.testing.assert_allclose(recovered, rec.u_sat, rtol=1e-9, atol=1e-12)


def test_recorded_disturbance_respects_budget():
    cfg = bs_adaptive_paper()
    rec, _ = run_scenario(cfg)
    spec = cfg.disturbance
    # reconstruct torque samples from the acceleration-domain log
    from agrosim import effective_inertias
    eff = effective_inertias(cfg.inertias, cfg.steering)
    tau = rec.l_true * eff.j1[None, :]
    det = spec.offset[None, :] + spec.sine_amp[None, :] * np.sin(
        spec.sine_freq * rec.t[:, None] + spec.sine_phase[None, :])
    noise = tau - det
    assert np.abs(spec.offset).max() <= 0.20 * cfg.u_max * (1 + 1e-12)
    assert np.abs(spec.sine_amp).max() <= 0.20 * cfg.u_max * (1 + 1e-12)
    # 6-sigma bound: a single sample beyond it has probability ~2e-9, and the
    # seeded record is fixed, so this is a deterministic check
    assert np.abs(noise).max() <= 6.0 * spec.noise_sigma.max()


def test_settle_regression_values():
    rec, metrics = run_scenario(fl_paper())
    np.testing.assert_allclose(metrics.settle_time, [0.323, 0.332, 0.0], atol=5e-4)
    rec, metrics = run_scenario(bs_paper())
    np.testing.assert_allclose(metrics.settle_time, [0.167, 0.326, 0.0], atol=5e-4)


def test_backstepping_lyapunov_descent_unsaturated():
    cfg = bs_paper()
    cfg = dataclasses.replace(cfg, u_max=np.inf)
    rec, _ = run_scenario(cfg)
    assert np.diff(rec.v2).max() <= 1e-9


def test_backstepping_error_convergence():
    # both error norms die out well inside the horizon, even torque-limited
    cfg = bs_paper()
    rec, _ = run_scenario(cfg)
    e1 = rec.error()
    e2 = -rec.rate + cfg.gains.k1[None, :] * e1
    assert np.linalg.norm(e1[-1]) < 1e-4
    assert np.linalg.norm(e2[-1]) < 1e-4
    settled = np.linalg.norm(e1, axis=1) < 1e-4
    assert settled[-1] and rec.t[np.argmax(settled)] < cfg.horizon / 2.0


def test_saturated_backstepping_overshoot_is_real():
    # torque-limited pitch recovery overshoots the band before re-entering;
    # pin the converged behavior so integrator changes get noticed
    rec, _ = run_scenario(bs_paper())
    pitch_deg = np.rad2deg(rec.attitude[:, 1])
    assert pitch_deg.min() == pytest.approx(-3.48, abs=0.02)


def test_divergence_raises_with_step_index():
    cfg = _plain_config(gains=FlGains.from_scalars(1.0, 1e12), u_max=np.inf,
                        initial=BodyState(np.deg2rad([-22.5, 22.5, 0.0]), np.zeros(3)),
                        horizon=0.2)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as err:
            run_scenario(cfg)
    assert err.value.step > 0
    assert "step" in str(err.value)


def test_singular_steering_fails_fast():
    cfg = _plain_config(steering=SteeringConfig(0.2, 0.2))
    with pytest.raises(AllocationSingularityError):
        run_scenario(cfg)


def test_fl_runs_have_nan_v2_and_bs_runs_do_not():
    rec_fl, _ = run_scenario(fl_paper(horizon=0.05))
    assert np.isnan(rec_fl.v2).all()
    assert not np.isnan(rec_fl.v1).any()
    rec_bs, _ = run_scenario(bs_paper(horizon=0.05))
    assert not np.isnan(rec_bs.v2).any()


# ---------------------------------------------------------------------------
# settle time and estimate metrics
# ---------------------------------------------------------------------------

def test_settle_time_zero_error():
    t = np.arange(101) * 1e-3
    rec = _record_from_error(t, np.zeros((101, 3)))
    np.testing.assert_array_equal(settle_time(rec, np.deg2rad(2.0)), 0.0)


def test_settle_time_exponential_crossing():
    t = np.arange(3001) * 1e-3
    err = np.zeros((3001, 3))
    err[:, 0] = np.deg2rad(22.5) * np.exp(-t)
    rec = _record_from_error(t, err)
    out = settle_time(rec, np.deg2rad(2.0))
    assert out[0] == pytest.approx(np.log(11.25), abs=2e-3)
    assert out[1] == 0.0 and out[2] == 0.0


def test_settle_time_never_settles():
    t = np.arange(201) * 1e-3
    err = np.zeros((201, 3))
    err[:, 1] = np.deg2rad(5.0) * np.sin(200.0 * t) + np.deg2rad(3.0)
    rec = _record_from_error(t, err)
    assert np.isnan(settle_time(rec, np.deg2rad(2.0))[1])


def test_settle_time_enter_and_stay_semantics():
    t = np.arange(11) * 0.1
    err = np.zeros((11, 3))
    err[:, 0] = np.deg2rad([10, 1, 1, 1, 5, 1, 1, 1, 1, 1, 1])  # late excursion
    rec = _record_from_error(t, err)
    assert settle_time(rec, np.deg2rad(2.0))[0] == pytest.approx(0.5)


def test_estimate_error_metrics_trivial_cases():
    t = np.arange(101) * 1e-3
    zeros = np.zeros((101, 3))
    rec = _record_from_error(t, zeros)
    assert estimate_error_metrics(rec, (0.0, 0.1)) == 0.0

    c = np.array([1.0, 2.0, 2.0])
    rec2 = TrajectoryRecord(
        t=t, attitude=zeros, rate=zeros, u_cmd=zeros, u_sat=zeros, wheel=zeros,
        l_true=np.tile(c, (101, 1)), l_hat=zeros, v1=np.zeros(101),
        v2=np.zeros(101), reference=Reference.zero(),
    )
    assert estimate_error_metrics(rec2, (0.0, 0.1)) == pytest.approx(3.0, rel=1e-12)


def test_estimate_error_rms_regression_baseline():
    # golden value from the first verified adaptive run (seed 42); the bound
    # carries ~15% headroom so only a real regression trips it
    rec, _ = run_scenario(bs_adaptive_paper())
    rms = estimate_error_metrics(rec, (0.8, 1.2))
    assert rms == pytest.approx(0.8734, abs=2e-4)
    assert rms < 1.0


def test_estimate_error_metrics_invalid_windows():
    t = np.arange(101) * 1e-3
    zeros = np.zeros((101, 3))
    rec = _record_from_error(t, zeros)
    with pytest.raises(InvalidWindowError):
        estimate_error_metrics(rec, (0.05, 0.05))
    with pytest.raises(InvalidWindowError):
        estimate_error_metrics(rec, (0.0, 0.5))  # beyond horizon
    with pytest.raises(InvalidWindowError):
        estimate_error_metrics(rec, (0.00031, 0.00042))  # between samples


# ---------------------------------------------------------------------------
# trajectory record and CSV
# ---------------------------------------------------------------------------

def test_record_rejects_irregular_grid():
    t = np.array([0.0, 1e-3, 3e-3])
    zeros = np.zeros((3, 3))
    with pytest.raises(InvalidParameterError):
        TrajectoryRecord(t=t, attitude=zeros, rate=zeros, u_cmd=zeros,
                         u_sat=zeros, wheel=zeros, l_true=zeros, l_hat=zeros,
                         v1=np.zeros(3), v2=np.zeros(3), reference=Reference.zero())


def test_csv_format_and_precision():
    rec, _ = run_scenario(bs_adaptive_paper(horizon=0.02))
    buf = io.StringIO()
    rec.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == (
        "t,phi,theta,psi,phi_dot,theta_dot,psi_dot,"
        "u1_cmd,u2_cmd,u3_cmd,u1_sat,u2_sat,u3_sat,"
        "tau1,tau2,tau_delta,L1,L2,L3,Lhat1,Lhat2,Lhat3,V1,V2"
    )
    assert len(lines) == len(rec) + 1
    data = np.loadtxt(io.StringIO(buf.getvalue()), delimiter=",", skiprows=1)
    # angles serialized in degrees at full precision: exact round trip
    np.testing.assert_array_equal(data[:, 1:4], np.rad2deg(rec.attitude))
    np.testing.assert_array_equal(data[:, 4:7], np.rad2deg(rec.rate))
    np.testing.assert_array_equal(data[:, 16:19], rec.l_true)
    np.testing.assert_array_equal(data[:, 22], rec.v1)


def test_metrics_to_dict_converts_nan():
    t = np.arange(201) * 1e-3
    err = np.zeros((201, 3))
    err[:, 0] = 1.0  # one radian forever: never settles
    rec = _record_from_error(t, err)
    from agrosim import compute_metrics
    m = compute_metrics(rec)
    d = m.to_dict()
    assert d["settle_time_s"][0] is None
    assert d["settle_time_s"][1] == 0.0
