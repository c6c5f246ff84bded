"""JSON scenario configuration: parsing, validation, serialization.

Hand-written documents use degrees for every angular quantity (steering
angles, attitudes, rates, reference signals, sine phases); torques are N m
and times seconds.  A document may either name a ``preset`` (optionally
overriding ``dt``, ``horizon``, ``seed``) or spell out a full scenario.
Unknown keys are rejected with the offending key named, and missing optional
fields take the documented defaults (reference robot inertias, isotropic
steering, zero initial/reference state).

:func:`serialize_config` emits ``"angle_units": "rad"`` and raw internal
values, because degree/radian conversion is not bit-exact in floating point;
parsing such a document reproduces the original configuration exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any, Optional, Union

import numpy as np

from . import presets
from .control import BsGains, FlGains, Reference
from .dynamics import BodyState, InertiaSet, SteeringConfig, WheelGeometry
from .errors import ConfigError
from .sim import CONTROLLER_BS, CONTROLLER_FL, DisturbanceSpec, ScenarioConfig

_REQUIRED = object()


def _check_keys(obj: dict, allowed: set[str], context: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {context}{key!r}")


def _get(obj: dict, key: str, context: str, default: Any = _REQUIRED) -> Any:
    if key in obj:
        return obj[key]
    if default is _REQUIRED:
        raise ConfigError(f"missing required key {context}{key!r}")
    return default


def _number(value: Any, key: str, allow_inf: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {value!r}")
    v = float(value)
    if math.isnan(v) or (not allow_inf and math.isinf(v)):
        raise ConfigError(f"{key!r} must be finite, got {v!r}")
    return v


def _integer(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key!r} must be an integer, got {value!r}")
    return value


def _vec3(value: Any, key: str) -> np.ndarray:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return np.full(3, _number(value, key))
    if isinstance(value, list) and len(value) == 3:
        return np.array([_number(v, f"{key}[{i}]") for i, v in enumerate(value)])
    raise ConfigError(f"{key!r} must be a number or a list of 3 numbers, got {value!r}")


def _obj(value: Any, key: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{key!r} must be an object, got {value!r}")
    return value


class _AngleScale:
    """Converts schema angle values to radians according to angle_units."""

    def __init__(self, units: str):
        if units not in ("deg", "rad"):
            raise ConfigError(f"'angle_units' must be 'deg' or 'rad', got {units!r}")
        self.to_rad = (lambda x: np.deg2rad(x)) if units == "deg" else (lambda x: x)


def _parse_gains(doc: dict, controller: str) -> Union[FlGains, BsGains]:
    obj = _obj(_get(doc, "gains", ""), "gains")
    if controller == CONTROLLER_FL:
        _check_keys(obj, {"k1", "k2"}, "gains.")
        return FlGains(_vec3(_get(obj, "k1", "gains."), "gains.k1"),
                       _vec3(_get(obj, "k2", "gains."), "gains.k2"))
    _check_keys(obj, {"k1", "k2", "gamma", "lambda", "sigma"}, "gains.")
    return BsGains(
        k1=_vec3(_get(obj, "k1", "gains."), "gains.k1"),
        k2=_vec3(_get(obj, "k2", "gains."), "gains.k2"),
        gamma=_vec3(_get(obj, "gamma", "gains.", 1.0), "gains.gamma"),
        lam=_vec3(_get(obj, "lambda", "gains.", 1.0), "gains.lambda"),
        sigma=_vec3(_get(obj, "sigma", "gains.", 1.0), "gains.sigma"),
    )


def _parse_inertias(doc: dict) -> InertiaSet:
    if "inertias" not in doc:
        return presets.paper_inertias()
    obj = _obj(doc["inertias"], "inertias")
    _check_keys(obj, {"j_body", "j_wheel", "j_reflected", "geometry"}, "inertias.")
    geometry = None
    if obj.get("geometry") is not None:
        g = _obj(obj["geometry"], "inertias.geometry")
        _check_keys(g, {"a", "b", "c", "m_w"}, "inertias.geometry.")
        geometry = WheelGeometry(
            a=_number(_get(g, "a", "inertias.geometry."), "a"),
            b=_number(_get(g, "b", "inertias.geometry."), "b"),
            c=_number(_get(g, "c", "inertias.geometry."), "c"),
            m_w=_number(_get(g, "m_w", "inertias.geometry."), "m_w"),
        )
    return InertiaSet(
        j_body=_vec3(_get(obj, "j_body", "inertias."), "inertias.j_body"),
        j_wheel=_vec3(_get(obj, "j_wheel", "inertias."), "inertias.j_wheel"),
        j_reflected=_vec3(_get(obj, "j_reflected", "inertias."), "inertias.j_reflected"),
        geometry=geometry,
    )


def _parse_disturbance(doc: dict, scale: _AngleScale) -> Optional[DisturbanceSpec]:
    if doc.get("disturbance") is None:
        return None
    obj = _obj(doc["disturbance"], "disturbance")
    _check_keys(
        obj,
        {"offset", "sine_amp", "sine_freq", "sine_phase", "noise_sigma", "seed"},
        "disturbance.",
    )
    return DisturbanceSpec(
        offset=_vec3(_get(obj, "offset", "disturbance.", 0.0), "disturbance.offset"),
        sine_amp=_vec3(_get(obj, "sine_amp", "disturbance.", 0.0), "disturbance.sine_amp"),
        sine_freq=_number(_get(obj, "sine_freq", "disturbance.", 0.0), "disturbance.sine_freq"),
        sine_phase=scale.to_rad(
            _vec3(_get(obj, "sine_phase", "disturbance.", 0.0), "disturbance.sine_phase")
        ),
        noise_sigma=_vec3(
            _get(obj, "noise_sigma", "disturbance.", 0.0), "disturbance.noise_sigma"
        ),
        seed=_integer(_get(obj, "seed", "disturbance.", 0), "disturbance.seed"),
    )


_TOP_KEYS = {
    "angle_units", "controller", "gains", "inertias", "steering", "initial",
    "reference", "u_max", "dt", "horizon", "adaptation_enabled", "disturbance",
}
_PRESET_KEYS = {"preset", "dt", "horizon", "seed"}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document.

    Raises
    ------
    ConfigError
        For malformed JSON, unknown keys, wrong types, or missing fields.
    InvalidParameterError, DisturbanceBudgetError
        Propagated from scenario construction when a value violates an
        invariant (non-positive u_max, over-budget disturbance, ...).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a JSON object")

    if "preset" in doc:
        _check_keys(doc, _PRESET_KEYS, "")
        name = doc["preset"]
        if not isinstance(name, str):
            raise ConfigError(f"'preset' must be a string, got {name!r}")
        overrides: dict[str, Any] = {}
        if "dt" in doc:
            overrides["dt"] = _number(doc["dt"], "dt")
        if "horizon" in doc:
            overrides["horizon"] = _number(doc["horizon"], "horizon")
        if "seed" in doc:
            overrides["seed"] = _integer(doc["seed"], "seed")
        try:
            return presets.preset(name, **overrides)
        except TypeError:
            raise ConfigError(
                f"preset {name!r} does not accept override {sorted(overrides)!r}"
            ) from None

    _check_keys(doc, _TOP_KEYS, "")
    scale = _AngleScale(_get(doc, "angle_units", "", "deg"))

    controller = _get(doc, "controller", "")
    if controller not in (CONTROLLER_FL, CONTROLLER_BS):
        raise ConfigError(
            f"'controller' must be {CONTROLLER_FL!r} or {CONTROLLER_BS!r}, got {controller!r}"
        )

    steering_obj = _obj(_get(doc, "steering", "", {"delta1": 45.0, "delta2": -45.0}), "steering")
    _check_keys(steering_obj, {"delta1", "delta2"}, "steering.")
    steering = SteeringConfig(
        scale.to_rad(_number(_get(steering_obj, "delta1", "steering."), "steering.delta1")),
        scale.to_rad(_number(_get(steering_obj, "delta2", "steering."), "steering.delta2")),
    )

    initial_obj = _obj(_get(doc, "initial", "", {}), "initial")
    _check_keys(initial_obj, {"attitude", "rate"}, "initial.")
    initial = BodyState(
        scale.to_rad(_vec3(_get(initial_obj, "attitude", "initial.", 0.0), "initial.attitude")),
        scale.to_rad(_vec3(_get(initial_obj, "rate", "initial.", 0.0), "initial.rate")),
    )

    ref_obj = _obj(_get(doc, "reference", "", {}), "reference")
    _check_keys(ref_obj, {"x_d", "xd_dot", "xd_ddot", "rho"}, "reference.")
    reference = Reference(
        scale.to_rad(_vec3(_get(ref_obj, "x_d", "reference.", 0.0), "reference.x_d")),
        scale.to_rad(_vec3(_get(ref_obj, "xd_dot", "reference.", 0.0), "reference.xd_dot")),
        scale.to_rad(_vec3(_get(ref_obj, "xd_ddot", "reference.", 0.0), "reference.xd_ddot")),
        rho=_number(_get(ref_obj, "rho", "reference.", 100.0), "reference.rho"),
    )

    adaptation = _get(doc, "adaptation_enabled", "", False)
    if not isinstance(adaptation, bool):
        raise ConfigError(f"'adaptation_enabled' must be a boolean, got {adaptation!r}")

    return ScenarioConfig(
        inertias=_parse_inertias(doc),
        steering=steering,
        initial=initial,
        reference=reference,
        controller=controller,
        gains=_parse_gains(doc, controller),
        u_max=_number(_get(doc, "u_max", ""), "u_max", allow_inf=True),
        dt=_number(_get(doc, "dt", "", 1e-3), "dt"),
        horizon=_number(_get(doc, "horizon", "", 1.5), "horizon"),
        disturbance=_parse_disturbance(doc, scale),
        adaptation_enabled=adaptation,
    )


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(config: ScenarioConfig) -> str:
    """Serialize a scenario losslessly (angle_units is 'rad' on purpose:
    parse_config(serialize_config(c)) reconstructs c exactly)."""
    gains: dict[str, Any] = {"k1": list(config.gains.k1), "k2": list(config.gains.k2)}
    if isinstance(config.gains, BsGains):
        gains["gamma"] = list(config.gains.gamma)
        gains["lambda"] = list(config.gains.lam)
        gains["sigma"] = list(config.gains.sigma)

    inertias: dict[str, Any] = {
        "j_body": list(config.inertias.j_body),
        "j_wheel": list(config.inertias.j_wheel),
        "j_reflected": list(config.inertias.j_reflected),
    }
    if config.inertias.geometry is not None:
        g = config.inertias.geometry
        inertias["geometry"] = {"a": g.a, "b": g.b, "c": g.c, "m_w": g.m_w}

    disturbance = None
    if config.disturbance is not None:
        d = config.disturbance
        disturbance = {
            "offset": list(d.offset),
            "sine_amp": list(d.sine_amp),
            "sine_freq": d.sine_freq,
            "sine_phase": list(d.sine_phase),
            "noise_sigma": list(d.noise_sigma),
            "seed": d.seed,
        }

    doc = {
        "angle_units": "rad",
        "controller": config.controller,
        "gains": gains,
        "inertias": inertias,
        "steering": {"delta1": config.steering.delta1, "delta2": config.steering.delta2},
        "initial": {
            "attitude": list(config.initial.attitude),
            "rate": list(config.initial.rate),
        },
        "reference": {
            "x_d": list(config.reference.x_d),
            "xd_dot": list(config.reference.xd_dot),
            "xd_ddot": list(config.reference.xd_ddot),
            "rho": config.reference.rho,
        },
        "u_max": config.u_max,
        "dt": config.dt,
        "horizon": config.horizon,
        "adaptation_enabled": config.adaptation_enabled,
        "disturbance": disturbance,
    }
    return json.dumps(doc, indent=2)
