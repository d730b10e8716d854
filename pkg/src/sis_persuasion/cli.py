"""Command-line entry point.

Experiments are described by a small TOML config (sections ``model``,
``smith``, ``init``, ``experiment``) with shipped presets for the headline
figures; subcommands select the experiment kind and artifacts are written
as CSV/JSON files.  One JSON summary line goes to stdout; logging goes to
stderr.  Exit codes: 0 success (non-convergence is a warning, not an
error), 2 config problem, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .equilibrium import (
    ClassificationError,
    RootBracketError,
    optimal_static_signal,
    solve_sne,
    thresholds,
)
from .model import (
    EndemicExistenceError,
    ModelParams,
    ParameterError,
    PopulationState,
    SignalDomainError,
    check_assumptions,
)
from .optimal_control import (
    OcpSpec,
    SolverOptions,
    StageCost,
    compare_static_dynamic,
    objective,
    solve,
    write_control_csv,
    write_solution_json,
)
from .presets import PRESETS, preset
from .simulate import (
    ControlSchedule,
    IntegrateOptions,
    IntegrationError,
    SmithConfig,
    integrate,
    write_trajectory_csv,
)
from .sweep import (
    grid_mui,
    static_sweep,
    write_mui_matrix_csv,
    write_mui_summary_csv,
    write_sweep_csv,
)

KINDS = ("sne", "static-sweep", "simulate", "optimize", "compare", "grid-mui", "check")

_NUMERIC_ERRORS = (
    ParameterError,
    SignalDomainError,
    EndemicExistenceError,
    RootBracketError,
    ClassificationError,
    IntegrationError,
)


class ConfigError(ValueError):
    """Malformed, unknown, or missing configuration."""


_SCHEMA: dict[str, dict[str, type]] = {
    "model": {
        "alpha": float,
        "gamma": float,
        "beta_p": float,
        "beta_u": float,
        "c_p": float,
        "c_u": float,
        "loss": float,
        "mu_i": float,
    },
    "smith": {"sigma": float},
    "init": {"y": float, "z_sbar": float, "z_ibar": float},
    "experiment": {
        "kind": str,
        "mu_s": float,
        "mu_min": float,
        "mu_max": float,
        "step": float,
        "horizon_t": float,
        "n_intervals": int,
        "cost_weight": float,
        "dt": float,
        "t_max": float,
        "grid_dt": float,
        "stationarity_tol": float,
        "thin": int,
        "max_iter": int,
    },
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "model": {
        "alpha": 0.45,
        "gamma": 0.2,
        "beta_p": 0.5,
        "beta_u": 0.65,
        "c_p": 20.0,
        "c_u": 25.0,
        "loss": 80.0,
        "mu_i": 1.0,
    },
    "smith": {"sigma": 20.0},
    "init": {"y": 0.01, "z_sbar": 0.5, "z_ibar": 0.5},
    "experiment": {
        "kind": "check",
        "mu_min": 0.01,
        "mu_max": 0.96,
        "step": 0.005,
        "horizon_t": 23.0,
        "n_intervals": 46,
        "cost_weight": 0.0,
        "dt": 0.01,
        "t_max": 500.0,
        "grid_dt": 0.02,
        "stationarity_tol": 1e-8,
        "thin": 1,
        "max_iter": 500,
    },
}


def _validate_table(table: dict[str, Any]) -> dict[str, dict[str, Any]]:
    out: dict[str, dict[str, Any]] = {}
    for section, entries in table.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(entries, dict):
            raise ConfigError(f"section [{section}] must be a table")
        out[section] = {}
        for key, value in entries.items():
            expected = _SCHEMA[section].get(key)
            if expected is None:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            if expected is float and isinstance(value, (int, float)) and not isinstance(value, bool):
                out[section][key] = float(value)
            elif expected is int:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
                if isinstance(value, float) and not value.is_integer():
                    raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
                out[section][key] = int(value)
            elif expected is str:
                if not isinstance(value, str):
                    raise ConfigError(f"{section}.{key} must be a string, got {value!r}")
                out[section][key] = value
            elif isinstance(value, expected):
                out[section][key] = value
            else:
                raise ConfigError(f"{section}.{key} must be {expected.__name__}, got {value!r}")
    return out


def _merge(base: dict[str, dict[str, Any]], over: dict[str, dict[str, Any]]) -> dict[str, dict[str, Any]]:
    out = {s: dict(v) for s, v in base.items()}
    for section, entries in over.items():
        out.setdefault(section, {}).update(entries)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully-merged experiment description."""

    model: ModelParams
    smith: SmithConfig
    init: PopulationState
    kind: str
    options: dict[str, Any]
    raw: dict[str, dict[str, Any]]

    @property
    def params_hash(self) -> str:
        text = json.dumps(self.raw, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def build_config(table: dict[str, dict[str, Any]]) -> ExperimentConfig:
    merged = _merge(_DEFAULTS, _validate_table(table))
    kind = merged["experiment"]["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")
    try:
        model = ModelParams(**merged["model"])
        smith = SmithConfig(**merged["smith"])
        init = PopulationState(**merged["init"])
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    options = {k: v for k, v in merged["experiment"].items() if k != "kind"}
    return ExperimentConfig(model, smith, init, kind, options, merged)


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_toml(table: dict[str, dict[str, Any]]) -> str:
    lines = []
    for section in ("model", "smith", "init", "experiment"):
        if section not in table:
            continue
        lines.append(f"[{section}]")
        for key in sorted(table[section]):
            lines.append(f"{key} = {_toml_value(table[section][key])}")
        lines.append("")
    return "\n".join(lines)


def _parse_override(text: str) -> tuple[str, str, Any]:
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    target, raw = text.split("=", 1)
    section, key = target.split(".", 1)
    for caster in (int, float):
        try:
            return section, key, caster(raw)
        except ValueError:
            continue
    if raw.lower() in ("true", "false"):
        return section, key, raw.lower() == "true"
    return section, key, raw.strip("\"'")


def _require(cfg: ExperimentConfig, key: str) -> Any:
    value = cfg.options.get(key)
    if value is None:
        raise ConfigError(f"experiment kind {cfg.kind!r} requires experiment.{key}")
    return value


def _ocp_spec(cfg: ExperimentConfig) -> OcpSpec:
    return OcpSpec(
        params=cfg.model,
        smith=cfg.smith,
        horizon_t=float(cfg.options["horizon_t"]),
        n_intervals=int(cfg.options["n_intervals"]),
        stage_cost=StageCost(float(cfg.options["cost_weight"])),
        init_state=cfg.init,
        dt=float(cfg.options["dt"]),
    )


def run_experiment(cfg: ExperimentConfig, out_dir: Path) -> dict[str, Any]:
    """Execute the configured experiment and return the summary payload."""
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    warnings: list[str] = []
    metrics: dict[str, Any] = {}

    if cfg.kind == "check":
        report = check_assumptions(cfg.model)
        metrics.update(
            a1_truthful=report.a1_truthful,
            a1_costs=report.a1_costs,
            a1_recovery=report.a1_recovery,
            a2_protection_cost=report.a2_protection_cost,
        )
        try:
            th = thresholds(cfg.model)
            metrics.update(
                mu_s_min=th.mu_s_min,
                mu_s_max=th.mu_s_max,
                y_star_p=th.y_star_p,
                y_star_int=th.y_star_int,
            )
        except _NUMERIC_ERRORS as exc:
            warnings.append(f"thresholds unavailable: {exc}")

    elif cfg.kind == "sne":
        mu_s = float(_require(cfg, "mu_s"))
        res = solve_sne(mu_s, cfg.model)
        metrics.update(
            mu_s=mu_s,
            case_id=res.case_id.name,
            y_star=res.y_star,
            z_sbar_star=res.z_sbar_star,
            z_ibar_star=res.z_ibar_star,
        )

    elif cfg.kind == "static-sweep":
        table = static_sweep(
            cfg.model,
            (float(cfg.options["mu_min"]), float(cfg.options["mu_max"])),
            float(cfg.options["step"]),
        )
        path = out_dir / "sweep.csv"
        write_sweep_csv(table, path)
        outputs.append(str(path))
        n_errors = sum(1 for c in table.cells if c.error)
        if n_errors:
            warnings.append(f"{n_errors} sweep cells failed")
        metrics.update(
            argmin_mu_s=table.argmin_mu_s,
            min_y_star=float(min(c.result.y_star for c in table.cells if c.result)),
            n_cells=len(table.cells),
            n_errors=n_errors,
        )

    elif cfg.kind == "simulate":
        mu_s = float(_require(cfg, "mu_s"))
        schedule = ControlSchedule.constant(mu_s, float(cfg.options["horizon_t"]))
        traj = integrate(
            cfg.init,
            schedule,
            cfg.model,
            cfg.smith,
            IntegrateOptions(
                h=float(cfg.options["dt"]), cost_weight=float(cfg.options["cost_weight"])
            ),
        )
        path = out_dir / "trajectory.csv"
        write_trajectory_csv(traj, path, every=int(cfg.options["thin"]))
        outputs.append(str(path))
        terminal = traj.terminal_state()
        metrics.update(
            mu_s=mu_s,
            terminal_y=terminal.y,
            terminal_z_sbar=terminal.z_sbar,
            terminal_z_ibar=terminal.z_ibar,
            cost_integral=float(traj.cost[-1]),
            max_clamp=traj.max_clamp,
        )

    elif cfg.kind == "optimize":
        spec = _ocp_spec(cfg)
        solver = SolverOptions(max_iter=int(cfg.options["max_iter"]))
        sol = solve(spec, solver)
        static = optimal_static_signal(cfg.model)
        baseline = objective(
            spec, ControlSchedule.constant(static.mu_s, spec.horizon_t, spec.n_intervals)
        )
        control_path = out_dir / "control.csv"
        traj_path = out_dir / "trajectory.csv"
        sol_path = out_dir / "solution.json"
        write_control_csv(sol.control, control_path)
        write_trajectory_csv(sol.trajectory, traj_path, every=int(cfg.options["thin"]))
        write_solution_json(sol, sol_path, static_baseline_objective=baseline)
        outputs.extend([str(control_path), str(traj_path), str(sol_path)])
        if not sol.converged:
            warnings.append(f"solver hit the iteration cap ({sol.exit_reason})")
        metrics.update(
            objective=sol.objective,
            static_baseline_objective=baseline,
            iterations=sol.iterations,
            first_order_residual=sol.first_order_residual,
            converged=sol.converged,
        )

    elif cfg.kind == "compare":
        spec = _ocp_spec(cfg)
        solver = SolverOptions(max_iter=int(cfg.options["max_iter"]))
        rep = compare_static_dynamic(spec, solver)
        static_path = out_dir / "static_trajectory.csv"
        dyn_path = out_dir / "dynamic_trajectory.csv"
        control_path = out_dir / "control.csv"
        cmp_path = out_dir / "comparison.json"
        write_trajectory_csv(rep.static_trajectory, static_path, every=int(cfg.options["thin"]))
        write_trajectory_csv(rep.dynamic.trajectory, dyn_path, every=int(cfg.options["thin"]))
        write_control_csv(rep.dynamic.control, control_path)
        write_solution_json(rep.dynamic, cmp_path, static_baseline_objective=rep.static_objective)
        outputs.extend([str(static_path), str(dyn_path), str(control_path), str(cmp_path)])
        if not rep.dynamic.converged:
            warnings.append(f"solver hit the iteration cap ({rep.dynamic.exit_reason})")
        metrics.update(
            static_mu_s=rep.static.mu_s,
            static_grid_derived=rep.static.grid_derived,
            static_objective=rep.static_objective,
            dynamic_objective=rep.dynamic_objective,
            dominance_fraction=rep.dominance_fraction,
        )

    elif cfg.kind == "grid-mui":
        grid = grid_mui(
            cfg.model,
            step=float(cfg.options["step"]),
            smith=cfg.smith,
            init_state=cfg.init,
            t_max=float(cfg.options["t_max"]),
            h=float(cfg.options["grid_dt"]),
            stationarity_tol=float(cfg.options["stationarity_tol"]),
        )
        matrix_path = out_dir / "y_matrix.csv"
        summary_path = out_dir / "mui_summary.csv"
        write_mui_matrix_csv(grid, matrix_path)
        write_mui_summary_csv(grid, summary_path)
        outputs.extend([str(matrix_path), str(summary_path)])
        n_bad = sum(r.n_unconverged for r in grid.rows)
        if n_bad:
            warnings.append(f"{n_bad} grid cells did not reach stationarity")
        gaps = grid.symmetry_gaps()
        top_row = grid.rows[-1]
        metrics.update(
            n_cells=int(grid.y.size),
            n_unconverged=n_bad,
            max_symmetry_gap=float(gaps.max()) if len(gaps) else None,
            mu_s_opt_at_truthful=top_row.mu_s_opt,
            min_y_at_truthful=top_row.min_y,
        )

    else:  # pragma: no cover - guarded by build_config
        raise ConfigError(f"unhandled kind {cfg.kind!r}")

    return {
        "experiment": cfg.kind,
        "params_hash": cfg.params_hash,
        "outputs": outputs,
        "metrics": metrics,
        "warnings": warnings,
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persuade-sis",
        description="Signal design for protection adoption in SIS epidemics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} experiment")
        sp.add_argument("--config", type=Path, help="TOML config file")
        sp.add_argument("--preset", choices=sorted(PRESETS), help="named preset to start from")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override one config value (repeatable)",
        )
        sp.add_argument(
            "--dump-config",
            action="store_true",
            help="print the merged config as TOML and exit",
        )
        sp.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        if kind in ("sne", "simulate"):
            sp.add_argument("--mu-s", type=float, default=None, help="signal fidelity")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        table: dict[str, dict[str, Any]] = {}
        if args.preset:
            table = _merge(table, preset(args.preset))
        if args.config:
            try:
                with open(args.config, "rb") as fh:
                    table = _merge(table, tomllib.load(fh))
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"config parse error: {exc}") from exc
        for text in args.overrides:
            section, key, value = _parse_override(text)
            table.setdefault(section, {})[key] = value
        if getattr(args, "mu_s", None) is not None:
            table.setdefault("experiment", {})["mu_s"] = args.mu_s
        table.setdefault("experiment", {})["kind"] = args.command
        cfg = build_config(table)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 2

    if args.dump_config:
        print(render_toml(cfg.raw), end="")
        return 0

    try:
        summary = run_experiment(cfg, args.out)
    except _NUMERIC_ERRORS as exc:
        print(json.dumps({"error": str(exc), "kind": "numerical"}), file=sys.stderr)
        return 3

    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
