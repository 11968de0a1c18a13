"""Batch experiment runner: config ingestion, sweeps, Monte Carlo, CSV/JSON.

No interactive surface: the tool reads a flat key-value config, runs the
requested sweep deterministically, and writes machine-readable tables. The
``runtime_ms`` column is a deterministic algorithmic-work metric (counted
elementary operations / 1000), not wall-clock time, so identical configs
produce byte-identical output regardless of host load or thread count.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .benchmarks import (
    AfRelayConfig,
    SystemParams,
    WorkMeter,
    af_baseline,
    detuned_deployment,
    passive_baseline,
    solve_backhaul,
)
from .errors import ConfigError
from .geometry import RisGeometry, SourceArray
from .scenario import AntennaPattern, ScenarioConfig, generate_scenario
from .units import db_to_lin, dbm_to_watt, watt_to_dbm

log = logging.getLogger("arisbh")

CSV_COLUMNS = (
    "sweep_value",
    "seed",
    "method",
    "obj_w",
    "obj_dbm",
    "sum_pm_w",
    "p_tot_a_w",
    "eta_bits_per_joule",
    "feasible_src",
    "feasible_ris",
    "partitions_l",
    "alpha_star",
    "runtime_ms",
)

SWEEP_AXES = ("d_g", "h", "n", "alpha", "af_distance")
METHOD_ORDER = ("active", "detuned", "passive", "af")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment configuration; defaults reproduce the reference setup."""

    # backhaul system
    b_b_hz: float = 50e6
    sigma_sq_dbm: float = -80.0
    sigma_a_sq_dbm: float = -80.0
    beta0_db: float = -43.3
    wavelength_m: float = 0.0857
    n_elements: int = 300
    d_ris_wl: float = 0.1
    h_ris_m: float = 180.0
    m_antennas: int = 16
    d_s_wl: float = 0.5
    g_max_db: float = 8.0
    p_max_dbm: float = 20.0
    p_max_a_dbm: float = 20.0
    alpha_max_sq_db: float = 40.0
    p_e_dbm: float = -3.8
    delta0_db: float = -5.0
    placement_repass: bool = False
    # scenario
    d_g_m: float = 1000.0
    region_side_m: float = 500.0
    n0_users: int = 240
    m0: int = 12
    cluster_refine_steps: int = 1
    uav_altitude_m: float = 45.0
    # fronthaul (access link feeding the rate targets)
    b_f_hz: float = 1e6
    p_f_tx_dbm: float = 0.0
    sigma_f_sq_dbm: float = -77.0
    fronthaul_beta0_db: float = -38.47
    # directional antenna pattern
    theta_h_deg: float = 65.0
    phi_h_deg: float = 65.0
    sla_v_db: float = 30.0
    a_max_db: float = 30.0
    # constant power offsets (efficiency only)
    p_gbs_w: float = 0.0
    p_ap_w: float = 0.0
    p_uav_bs_w: float = 0.0
    # AF-relay benchmark
    af_elements: int = 300
    af_p_el_dbm: float = 18.2
    af_p_syn_dbm: float = 17.0
    af_relay_frac: float = 0.5
    af_relay_p_max_dbm: float = 20.0
    # experiment driver
    sweep_axis: str = "d_g"
    sweep_values: tuple = (1000.0,)
    realizations: int = 1
    seed_base: int = 1
    methods: tuple = ("active",)
    jobs: int = 1

    def validate(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if len(self.sweep_values) == 0:
            raise ConfigError("sweep_values must be non-empty")
        if list(self.sweep_values) != sorted(self.sweep_values):
            raise ConfigError("sweep_values must be sorted ascending")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        unknown = set(self.methods) - set(METHOD_ORDER)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise ConfigError("at least one method must be enabled")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.n0_users < self.m0:
            raise ConfigError("n0_users must be >= m0")
        return self


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_value(name: str, raw: str, target_type):
    raw = raw.strip()
    try:
        if target_type is bool:
            return _BOOL_VALUES[raw.lower()]
        if target_type is int:
            return int(float(raw))
        if target_type is float:
            return float(raw)
        if target_type is str:
            return raw
        if target_type is tuple:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if name == "methods":
                return tuple(parts)
            return tuple(float(p) for p in parts)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from exc
    raise ConfigError(f"unsupported type for key {name!r}")


def parse_config(path) -> ExperimentConfig:
    """Read a flat ``key = value`` file; unknown keys are errors."""
    field_types = {f.name: f.type for f in fields(ExperimentConfig)}
    type_map = {"float": float, "int": int, "bool": bool, "str": str, "tuple": tuple}
    overrides = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in field_types:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        tname = field_types[key]
        ttype = type_map[tname if isinstance(tname, str) else tname.__name__]
        overrides[key] = _parse_value(key, raw, ttype)
    return ExperimentConfig(**overrides).validate()


def _system_params(cfg: ExperimentConfig) -> SystemParams:
    return SystemParams(
        source=SourceArray(
            m_antennas=cfg.m_antennas,
            spacing_wavelengths=cfg.d_s_wl,
            gain=float(db_to_lin(cfg.g_max_db)),
            p_max=float(dbm_to_watt(cfg.p_max_dbm)),
        ),
        ris=RisGeometry(
            n_elements=cfg.n_elements,
            spacing_wavelengths=cfg.d_ris_wl,
            altitude=cfg.h_ris_m,
            wavelength=cfg.wavelength_m,
        ),
        beta0=float(db_to_lin(cfg.beta0_db)),
        bandwidth_b=cfg.b_b_hz,
        sigma_sq=float(dbm_to_watt(cfg.sigma_sq_dbm)),
        sigma_a_sq=float(dbm_to_watt(cfg.sigma_a_sq_dbm)),
        p_element=float(dbm_to_watt(cfg.p_e_dbm)),
        alpha_max=float(np.sqrt(db_to_lin(cfg.alpha_max_sq_db))),
        p_max=float(dbm_to_watt(cfg.p_max_dbm)),
        p_max_a=float(dbm_to_watt(cfg.p_max_a_dbm)),
        delta0_db=cfg.delta0_db,
        placement_repass=cfg.placement_repass,
        p_gbs=cfg.p_gbs_w,
        p_ap=cfg.p_ap_w,
        p_uav_bs=cfg.p_uav_bs_w,
    )


def _scenario_config(cfg: ExperimentConfig) -> ScenarioConfig:
    return ScenarioConfig(
        region_side=cfg.region_side_m,
        region_center=np.array([cfg.d_g_m, 0.0]),
        n_users=cfg.n0_users,
        m0=cfg.m0,
        cluster_refine_steps=cfg.cluster_refine_steps,
        uav_altitude=cfg.uav_altitude_m,
        bandwidth_f=cfg.b_f_hz,
        p_f_tx=float(dbm_to_watt(cfg.p_f_tx_dbm)),
        sigma_f_sq=float(dbm_to_watt(cfg.sigma_f_sq_dbm)),
        beta0_f=float(db_to_lin(cfg.fronthaul_beta0_db)),
        pattern=AntennaPattern(
            g_max_db=cfg.g_max_db,
            theta_h_deg=cfg.theta_h_deg,
            phi_h_deg=cfg.phi_h_deg,
            sla_v_db=cfg.sla_v_db,
            a_max_db=cfg.a_max_db,
        ),
    )


def _apply_sweep(cfg: ExperimentConfig, value: float) -> tuple[ExperimentConfig, float | None]:
    """Config for one sweep point; second return is a forced amplification gain."""
    axis = cfg.sweep_axis
    if axis in ("d_g", "af_distance"):
        return replace(cfg, d_g_m=float(value)), None
    if axis == "h":
        return replace(cfg, h_ris_m=float(value)), None
    if axis == "n":
        return replace(cfg, n_elements=int(value)), None
    if axis == "alpha":  # value is alpha^2 in dB, forced on the active method
        return cfg, float(np.sqrt(db_to_lin(value)))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _nan_row(value, seed, method):
    nan = float("nan")
    return {
        "sweep_value": value, "seed": seed, "method": method,
        "obj_w": nan, "obj_dbm": nan, "sum_pm_w": nan, "p_tot_a_w": nan,
        "eta_bits_per_joule": nan, "feasible_src": False, "feasible_ris": False,
        "partitions_l": 0, "alpha_star": nan, "runtime_ms": nan,
    }


def _deployment_row(value, seed, method, dep, runtime_ms):
    r = dep.report
    return {
        "sweep_value": value, "seed": seed, "method": method,
        "obj_w": r.obj, "obj_dbm": float(watt_to_dbm(r.obj)),
        "sum_pm_w": r.sum_pm, "p_tot_a_w": r.p_tot_a,
        "eta_bits_per_joule": r.eta,
        "feasible_src": r.feasible_source, "feasible_ris": r.feasible_ris,
        "partitions_l": dep.partition.l, "alpha_star": r.alpha_star,
        "runtime_ms": runtime_ms,
    }


def _af_row(value, seed, af, runtime_ms):
    return {
        "sweep_value": value, "seed": seed, "method": "af",
        "obj_w": af.obj, "obj_dbm": float(watt_to_dbm(af.obj)),
        "sum_pm_w": float(np.sum(af.p_src)),
        "p_tot_a_w": float(np.sum(af.p_relay)) + af.p_circ,
        "eta_bits_per_joule": af.eta,
        "feasible_src": True, "feasible_ris": af.feasible,
        "partitions_l": 0, "alpha_star": float("nan"),
        "runtime_ms": runtime_ms,
    }


def _run_realization(cfg: ExperimentConfig, value: float, seed: int):
    """Rows for every enabled method at one sweep point and seed."""
    point_cfg, forced_alpha = _apply_sweep(cfg, value)
    sys_p = _system_params(point_cfg)
    scen_cfg = _scenario_config(point_cfg)
    methods = [m for m in METHOD_ORDER if m in cfg.methods]

    base_work = WorkMeter()
    try:
        scenario = generate_scenario(scen_cfg, seed)
        base_work.add(scen_cfg.n_users * (1 + scenario.clustering_iterations))
    except Exception as exc:  # noqa: BLE001 - row-level fault isolation
        log.warning("scenario (%s=%s, seed=%d) failed: %s", cfg.sweep_axis, value, seed, exc)
        return [_nan_row(value, seed, m) for m in methods]

    rows = []
    for method in methods:
        work = WorkMeter()
        work.add(base_work.units)
        try:
            if method == "active":
                dep = solve_backhaul(scenario, sys_p, mode="active",
                                     forced_alpha=forced_alpha, work=work)
                rows.append(_deployment_row(value, seed, method, dep, work.runtime_ms))
            elif method == "detuned":
                dep = detuned_deployment(scenario, sys_p, work=work)
                rows.append(_deployment_row(value, seed, method, dep, work.runtime_ms))
            elif method == "passive":
                dep = passive_baseline(scenario, sys_p, work=work)
                rows.append(_deployment_row(value, seed, method, dep, work.runtime_ms))
            elif method == "af":
                af_cfg = AfRelayConfig(
                    n_elements=point_cfg.af_elements,
                    p_dac_mix_filt=float(dbm_to_watt(point_cfg.af_p_el_dbm)),
                    p_syn=float(dbm_to_watt(point_cfg.af_p_syn_dbm)),
                    relay_frac=point_cfg.af_relay_frac,
                    relay_p_max=float(dbm_to_watt(point_cfg.af_relay_p_max_dbm)),
                )
                af = af_baseline(scenario, sys_p, af_cfg, scen_cfg.region_center, work=work)
                rows.append(_af_row(value, seed, af, work.runtime_ms))
        except Exception as exc:  # noqa: BLE001 - row-level fault isolation
            log.warning("%s (%s=%s, seed=%d) failed: %s", method, cfg.sweep_axis, value, seed, exc)
            rows.append(_nan_row(value, seed, method))
    return rows


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Execute the sweep; deterministic given the config (incl. thread count)."""
    cfg.validate()
    tasks = [
        (vi, value, cfg.seed_base + r)
        for vi, value in enumerate(cfg.sweep_values)
        for r in range(cfg.realizations)
    ]
    results = [None] * len(tasks)
    if cfg.jobs == 1:
        for i, (_, value, seed) in enumerate(tasks):
            results[i] = _run_realization(cfg, value, seed)
    else:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = {
                pool.submit(_run_realization, cfg, value, seed): i
                for i, (_, value, seed) in enumerate(tasks)
            }
            for fut, i in futures.items():
                results[i] = fut.result()
    return [row for rows in results for row in rows]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def _csv_lines(rows):
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    return lines


_SUMMARY_METRICS = ("obj_dbm", "sum_pm_w", "eta_bits_per_joule")


def _summary_lines(rows):
    lines = ["sweep_value,method,metric,mean,median,p5,p95"]
    keys = []
    for row in rows:
        k = (row["sweep_value"], row["method"])
        if k not in keys:
            keys.append(k)
    for value, method in keys:
        sel = [r for r in rows if r["sweep_value"] == value and r["method"] == method]
        for metric in _SUMMARY_METRICS:
            data = np.array([r[metric] for r in sel], dtype=float)
            stats = (
                float(np.mean(data)),
                float(np.median(data)),
                float(np.percentile(data, 5)),
                float(np.percentile(data, 95)),
            )
            lines.append(
                ",".join([_fmt(value), method, metric] + [_fmt(s) for s in stats])
            )
    return lines


def emit(rows, out_dir, json_mirror: bool = True):
    """Write results.csv, summary.csv and (optionally) a results.json mirror.

    JSON numbers are parsed back from the CSV-formatted strings so both files
    carry identical values at 12 significant digits.
    """
    if not rows:
        raise ValueError("no results to emit")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "results.csv"
        csv_path.write_text("\n".join(_csv_lines(rows)) + "\n")
        summary_path = out / "summary.csv"
        summary_path.write_text("\n".join(_summary_lines(rows)) + "\n")
        paths = [csv_path, summary_path]
        if json_mirror:
            mirrored = []
            for row in rows:
                obj = {}
                for c in CSV_COLUMNS:
                    v = row[c]
                    if isinstance(v, bool) or isinstance(v, str):
                        obj[c] = v
                    elif isinstance(v, (int, np.integer)):
                        obj[c] = int(v)
                    else:
                        fv = float(_fmt(v))
                        obj[c] = None if math.isnan(fv) else fv
                mirrored.append(obj)
            json_path = out / "results.json"
            json_path.write_text(json.dumps(mirrored, indent=1) + "\n")
            paths.append(json_path)
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
    return paths


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="arisbh",
        description="Aerial amplifying-surface backhaul planner: batch experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep and write CSV/JSON results")
    run_p.add_argument("--config", required=True, help="flat key=value config file")
    run_p.add_argument("--out", default="arisbh_out", help="output directory")
    run_p.add_argument("--seeds", type=int, help="override realization count")
    run_p.add_argument("--sweep", help="override sweep, e.g. d_g=800,1000,1200")
    run_p.add_argument("--methods", help="comma list: active,detuned,passive,af")
    run_p.add_argument("--jobs", type=int, help="worker threads (output is identical)")

    check_p = sub.add_parser("check", help="validate a config without running")
    check_p.add_argument("--config", required=True)
    return parser


def _apply_cli_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seeds is not None:
        cfg = replace(cfg, realizations=args.seeds)
    if args.methods is not None:
        cfg = replace(cfg, methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()))
    if args.sweep is not None:
        if "=" not in args.sweep:
            raise ConfigError(f"--sweep expects axis=v1,v2,..., got {args.sweep!r}")
        axis, vals = args.sweep.split("=", 1)
        values = tuple(float(v) for v in vals.split(",") if v.strip())
        cfg = replace(cfg, sweep_axis=axis.strip(), sweep_values=values)
    if args.jobs is not None:
        cfg = replace(cfg, jobs=args.jobs)
    return cfg.validate()


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.command == "check":
            print(f"config OK: {len(cfg.sweep_values)} sweep value(s) on axis "
                  f"{cfg.sweep_axis!r}, {cfg.realizations} realization(s), "
                  f"methods {','.join(cfg.methods)}")
            return 0
        cfg = _apply_cli_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    rows = run_experiment(cfg)
    try:
        paths = emit(rows, args.out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print("\n".join(str(p) for p in paths))
    return 0


if __name__ == "__main__":
    sys.exit(main())
