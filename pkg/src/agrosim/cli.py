"""Scenario runner CLI.

    agrosim run --preset fl-paper --out results/
    agrosim run --config scenario.json --no-svg
    agrosim compare --preset fl-paper --preset bs-paper --out results/
    agrosim sweep --preset bs-paper --param k1 --values 5,10,20,40

Each run writes ``<name>.csv`` (full trajectory), ``<name>.metrics.json``
(settle times, peak torques, estimate-error RMS), and ``<name>.svg`` unless
``--no-svg`` is given.  The output directory defaults to ``$AGROSIM_OUT``,
then the current directory.  Exit status is 0 exactly when every requested
artifact was written.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import load_config
from .errors import AgroSimError, ComparisonInvalidError, ConfigError
from .presets import preset, preset_names
from .sim import Metrics, ScenarioConfig, TrajectoryRecord, run_scenario
from .svgchart import LineChart, save_svg


@dataclass
class RunManifest:
    """One requested scenario execution: source, output dir, emit flags."""

    name: str
    preset: Optional[str] = None
    config_path: Optional[str] = None
    out_dir: str = "."
    emit_csv: bool = True
    emit_svg: bool = True
    emit_metrics: bool = True
    seed: Optional[int] = None
    dt: Optional[float] = None
    horizon: Optional[float] = None

    def __post_init__(self):
        if (self.preset is None) == (self.config_path is None):
            raise ConfigError("exactly one of preset or config_path must be given")

    def load(self) -> ScenarioConfig:
        if self.preset is not None:
            overrides = {}
            if self.dt is not None:
                overrides["dt"] = self.dt
            if self.horizon is not None:
                overrides["horizon"] = self.horizon
            if self.seed is not None and self.preset == "bs-adaptive-paper":
                overrides["seed"] = self.seed
            cfg = preset(self.preset, **overrides)
        else:
            cfg = load_config(self.config_path)
            if self.dt is not None:
                cfg = dataclasses.replace(cfg, dt=self.dt)
            if self.horizon is not None:
                cfg = dataclasses.replace(cfg, horizon=self.horizon)
        if self.seed is not None and cfg.disturbance is not None:
            cfg = dataclasses.replace(
                cfg, disturbance=dataclasses.replace(cfg.disturbance, seed=self.seed)
            )
        return cfg


def attitude_chart(records: dict[str, TrajectoryRecord]) -> LineChart:
    chart = LineChart("Attitude", xlabel="time [s]", ylabel="angle [deg]")
    for label, rec in records.items():
        deg = np.rad2deg(rec.attitude)
        suffix = f" ({label})" if label else ""
        chart.add_series("roll" + suffix, rec.t, deg[:, 0])
        chart.add_series("pitch" + suffix, rec.t, deg[:, 1])
        chart.add_series("yaw" + suffix, rec.t, deg[:, 2])
    return chart


def torque_chart(records: dict[str, TrajectoryRecord]) -> LineChart:
    chart = LineChart("Applied body torque", xlabel="time [s]", ylabel="torque [N m]")
    for label, rec in records.items():
        suffix = f" ({label})" if label else ""
        for i, axis in enumerate(("x", "y", "z")):
            chart.add_series(f"tau_{axis}" + suffix, rec.t, rec.u_sat[:, i])
    return chart


def estimate_chart(rec: TrajectoryRecord) -> LineChart:
    chart = LineChart("Disturbance estimate", xlabel="time [s]", ylabel="[rad/s^2]")
    err = np.linalg.norm(rec.l_true - rec.l_hat, axis=1)
    chart.add_series("|L|", rec.t, np.linalg.norm(rec.l_true, axis=1))
    chart.add_series("|L_hat|", rec.t, np.linalg.norm(rec.l_hat, axis=1))
    chart.add_series("|L - L_hat|", rec.t, err)
    return chart


def _metrics_table(rows: dict[str, Metrics]) -> str:
    def fmt_settle(v: float) -> str:
        return "not settled" if math.isnan(v) else f"{v:.3f} s"

    lines = [f"{'scenario':<22}{'settle roll':<14}{'settle pitch':<14}"
             f"{'peak |u| [N m]':<16}{'est err RMS':<12}"]
    for name, m in rows.items():
        lines.append(
            f"{name:<22}{fmt_settle(m.settle_time[0]):<14}"
            f"{fmt_settle(m.settle_time[1]):<14}"
            f"{np.max(m.peak_torque):<16.4f}{m.est_error_rms:<12.4g}"
        )
    return "\n".join(lines)


def _write_outputs(manifest: RunManifest, records: dict[str, TrajectoryRecord],
                   metrics: dict[str, Metrics], charts: list[LineChart]) -> list[str]:
    os.makedirs(manifest.out_dir, exist_ok=True)
    written = []
    base = os.path.join(manifest.out_dir, manifest.name)
    if manifest.emit_csv:
        for label, rec in records.items():
            path = base + (f".{label}.csv" if len(records) > 1 else ".csv")
            rec.to_csv(path)
            written.append(path)
    if manifest.emit_metrics:
        path = base + ".metrics.json"
        doc = {name: m.to_dict() for name, m in metrics.items()}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc if len(metrics) > 1 else next(iter(doc.values())), fh, indent=2)
            fh.write("\n")
        written.append(path)
    if manifest.emit_svg:
        path = base + ".svg"
        save_svg(charts, path)
        written.append(path)
    return written


def cmd_run(manifest: RunManifest) -> int:
    """Execute one scenario and write its artifacts."""
    cfg = manifest.load()
    record, metrics = run_scenario(cfg)
    charts = [attitude_chart({"": record}), torque_chart({"": record})]
    if cfg.disturbance is not None:
        charts.append(estimate_chart(record))
    written = _write_outputs(manifest, {manifest.name: record},
                             {manifest.name: metrics}, charts)
    print(_metrics_table({manifest.name: metrics}))
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_compare(manifest_a: RunManifest, manifest_b: RunManifest) -> int:
    """Run two scenarios from the same initial/reference state and overlay
    their trajectories.

    Raises
    ------
    ComparisonInvalidError
        If the scenarios start from different states or track different
        references.
    """
    cfg_a, cfg_b = manifest_a.load(), manifest_b.load()
    if cfg_a.initial != cfg_b.initial:
        raise ComparisonInvalidError(
            "scenarios start from different initial states; comparison is meaningless"
        )
    if cfg_a.reference != cfg_b.reference:
        raise ComparisonInvalidError("scenarios track different references")
    rec_a, met_a = run_scenario(cfg_a)
    rec_b, met_b = run_scenario(cfg_b)
    names = (manifest_a.name, manifest_b.name)
    if names[0] == names[1]:
        names = (names[0] + "-a", names[1] + "-b")
    records = {names[0]: rec_a, names[1]: rec_b}
    metrics = {names[0]: met_a, names[1]: met_b}
    joint = dataclasses.replace(manifest_a, name=f"{names[0]}_vs_{names[1]}")
    charts = [attitude_chart(records), torque_chart(records)]
    written = _write_outputs(joint, records, metrics, charts)
    print(_metrics_table(metrics))
    for path in written:
        print(f"wrote {path}")
    return 0


_SWEEPABLE = {"k1", "k2", "gamma", "lambda", "sigma"}


def cmd_sweep(manifest: RunManifest, param: str, values: list[float]) -> int:
    """Grid over one gain, all axes together, and tabulate the metrics."""
    if param not in _SWEEPABLE:
        raise ConfigError(f"unknown sweep parameter {param!r}; choose from {sorted(_SWEEPABLE)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    base_cfg = manifest.load()
    field = {"lambda": "lam"}.get(param, param)
    if not hasattr(base_cfg.gains, field):
        raise ConfigError(
            f"parameter {param!r} does not apply to the {base_cfg.controller!r} controller"
        )
    metrics: dict[str, Metrics] = {}
    rows = []
    for value in values:
        gains = dataclasses.replace(base_cfg.gains, **{field: np.full(3, float(value))})
        cfg = dataclasses.replace(base_cfg, gains=gains)
        _, m = run_scenario(cfg)
        label = f"{param}={value:g}"
        metrics[label] = m
        rows.append({"value": value, **m.to_dict()})
    os.makedirs(manifest.out_dir, exist_ok=True)
    path = os.path.join(manifest.out_dir, f"{manifest.name}.sweep.{param}.metrics.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"parameter": param, "runs": rows}, fh, indent=2)
        fh.write("\n")
    print(_metrics_table(metrics))
    print(f"wrote {path}")
    return 0


def _default_out() -> str:
    return os.environ.get("AGROSIM_OUT", ".")


def _add_scenario_args(p: argparse.ArgumentParser, repeatable: bool = False) -> None:
    action = "append" if repeatable else "store"
    p.add_argument("--preset", action=action,
                   help=f"named scenario: {', '.join(preset_names())}")
    p.add_argument("--config", action=action, metavar="PATH",
                   help="JSON scenario file (see README for the schema)")
    p.add_argument("--out", default=_default_out(), metavar="DIR",
                   help="output directory (default: $AGROSIM_OUT or '.')")
    p.add_argument("--seed", type=int, default=None, help="override the disturbance seed")
    p.add_argument("--no-svg", action="store_true", help="skip the SVG plot")
    p.add_argument("--dt", type=float, default=None, help="override the integration step [s]")
    p.add_argument("--horizon", type=float, default=None, help="override the horizon [s]")


def _manifest_from_args(args, preset_name, config_path, name=None) -> RunManifest:
    if name is None:
        if preset_name is not None:
            name = preset_name
        else:
            name = os.path.splitext(os.path.basename(config_path))[0]
    return RunManifest(
        name=name, preset=preset_name, config_path=config_path, out_dir=args.out,
        emit_svg=not args.no_svg, seed=args.seed, dt=args.dt, horizon=args.horizon,
    )


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="agrosim",
        description="Airborne attitude stabilization scenarios for a 4WIDS robot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    _add_scenario_args(p_run)

    p_cmp = sub.add_parser("compare", help="run two scenarios and overlay them")
    _add_scenario_args(p_cmp, repeatable=True)

    p_sweep = sub.add_parser("sweep", help="grid over one gain")
    _add_scenario_args(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help=f"gain to sweep: {', '.join(sorted(_SWEEPABLE))}")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated gain values, e.g. 5,10,20")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_manifest_from_args(args, args.preset, args.config))
        if args.command == "compare":
            sources = [("preset", v) for v in (args.preset or [])]
            sources += [("config", v) for v in (args.config or [])]
            if len(sources) != 2:
                raise ConfigError("compare needs exactly two of --preset/--config")
            manifests = [
                _manifest_from_args(
                    args,
                    value if kind == "preset" else None,
                    value if kind == "config" else None,
                )
                for kind, value in sources
            ]
            return cmd_compare(manifests[0], manifests[1])
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}")
            return cmd_sweep(_manifest_from_args(args, args.preset, args.config),
                             args.param, values)
        raise ConfigError(f"unknown command {args.command!r}")
    except (AgroSimError, OSError) as exc:
        print(f"agrosim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
