"""
Whitham flow-map toolkit - Main entry point and orchestration.

Runs the non-uniform continuity demonstrations, the verification suites
and ad-hoc simulations of u_t + u u_x + L(u_x) = 0.

Usage:
    python -m whitham_flowmap.main simulate --symbol whitham --init sine:1,1.0 \
        --L 6.283185307 --modes 256 --t-end 1.0 --s 2.0 --out run/

Exit codes: 0 when every verdict passes, 1 when a verdict fails or the run
breaks down (the report is still written), 2 on configuration errors
(nothing is written).
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .constructions import high_freq, line_grid, low_freq_initial, periodic_approx
from .errors import ConfigurationError, NumericalBlowupError
from .experiments import (
    run_conservation,
    run_galilean,
    run_line_nonuniform,
    run_periodic_lowreg,
    run_periodic_nonuniform,
    run_skew_symmetry,
    run_symbol_conditions,
    verify_error_decay,
    verify_norm_lemmas,
    verify_scaling,
)
from .models import (
    DtPolicy,
    ExperimentReport,
    Field,
    LineFamilyParams,
    PeriodicFamilyParams,
    SolverConfig,
    SymbolSpec,
    is_power_of_two,
)
from .reports import diagnostics_summary, generate_text_summary
from .serialization import (
    config_list,
    load_field,
    load_run_config,
    save_diagnostics_csv,
    save_experiment_report,
    save_field_binary,
    save_field_csv,
    save_json,
    save_trajectories,
    write_columns,
)
from .solver import evolve
from .spectral import field_from_function, make_grid
from .symbols import eval_symbol, parse_symbol

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "periodic-nonuniform", "periodic-lowreg", "line-nonuniform",
            "verify", "symbols")
SUITES = ("norm-lemmas", "error-decay", "scaling", "conservation", "galilean",
          "skew-symmetry", "symbol-conditions")

# Values used when neither the config file nor a flag sets a key.
COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "simulate": {"length": 2.0 * math.pi, "modes": 256,
                 "t_end": 1.0, "s": 2.0},
    "periodic-nonuniform": {"s": 2.0, "n_list": [32, 64, 128, 256], "t_star": 1.0},
    "periodic-lowreg": {"s": 1.0, "sigma": 1.6, "eps": 0.1, "n_list": [64, 128, 256]},
    "line-nonuniform": {"s": 2.0, "delta": 1.5, "lambda_list": [16, 32, 64], "t_star": 0.5},
    "verify": {},
    "symbols": {"action": "eval"},
}

# Config-file spellings that differ from the RunConfig field name.
CONFIG_ALIASES = {"n": "n_list", "lambda": "lambda_list", "L": "length"}


class RunReport:
    """Tracks information about a tool run for reporting."""

    def __init__(self, command: str, reproducible: bool = False):
        self.command = command
        self.reproducible = reproducible
        self.start_time = datetime.now()
        self.end_time: Optional[datetime] = None
        self.inputs: dict = {}
        self.outputs: list[str] = []
        self.warnings: list[str] = []
        self.errors: list[str] = []
        self.statistics: dict = {}

    def add_input(self, name: str, path: Optional[Path], record_count: int = 0):
        """Record an input file."""
        self.inputs[name] = {
            "path": str(path) if path else None,
            "exists": path.exists() if path else False,
            "record_count": record_count,
        }

    def add_output(self, path: Path):
        self.outputs.append(str(path))

    def add_warning(self, message: str):
        if message not in self.warnings:
            self.warnings.append(message)

    def add_error(self, message: str):
        self.errors.append(message)

    def finalize(self):
        """Mark the run as complete."""
        self.end_time = datetime.now()

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization; no timestamps when reproducible."""
        data = {"command": self.command}
        if not self.reproducible:
            data["run_timestamp"] = self.start_time.isoformat()
            data["duration_seconds"] = (
                (self.end_time - self.start_time).total_seconds() if self.end_time else None
            )
        data.update({
            "inputs": self.inputs,
            "outputs": self.outputs,
            "warnings": self.warnings,
            "errors": self.errors,
            "statistics": self.statistics,
            "success": len(self.errors) == 0,
        })
        return data

    def generate_text_report(self) -> str:
        """Generate a human-readable run report."""
        lines = []
        lines.append("=" * 70)
        lines.append(f"WHITHAM FLOW-MAP TOOLKIT - RUN REPORT ({self.command})")
        lines.append("=" * 70)
        if not self.reproducible:
            lines.append(f"Run started: {self.start_time.strftime('%Y-%m-%d %H:%M:%S')}")
            if self.end_time:
                duration = (self.end_time - self.start_time).total_seconds()
                lines.append(f"Run completed: {self.end_time.strftime('%Y-%m-%d %H:%M:%S')}")
                lines.append(f"Duration: {duration:.2f} seconds")
        lines.append("")

        if self.inputs:
            lines.append("INPUT FILES")
            lines.append("-" * 40)
            for name, info in self.inputs.items():
                status = "found" if info["exists"] else "not found"
                path = info["path"] or "(not provided)"
                count = f" ({info['record_count']} values)" if info["record_count"] else ""
                lines.append(f"  {name}: {path} [{status}]{count}")
            lines.append("")

        if self.statistics:
            lines.append("PROCESSING SUMMARY")
            lines.append("-" * 40)
            for key, value in self.statistics.items():
                lines.append(f"  {key}: {value}")
            lines.append("")

        if self.warnings:
            lines.append("WARNINGS")
            lines.append("-" * 40)
            for warning in self.warnings:
                lines.append(f"  * {warning}")
            lines.append("")

        if self.errors:
            lines.append("ERRORS")
            lines.append("-" * 40)
            for error in self.errors:
                lines.append(f"  * {error}")
            lines.append("")

        lines.append("OUTPUT FILES")
        lines.append("-" * 40)
        for path in self.outputs:
            lines.append(f"  * {path}")
        lines.append("")

        lines.append("=" * 70)
        if self.errors:
            lines.append("STATUS: COMPLETED WITH ERRORS")
        elif self.warnings:
            lines.append("STATUS: COMPLETED WITH WARNINGS")
        else:
            lines.append("STATUS: COMPLETED SUCCESSFULLY")
        lines.append("=" * 70)
        return "\n".join(lines)


class _WarningCollector(logging.Handler):
    """Copies WARNING and above log records into the run report."""

    def __init__(self, run_report: RunReport):
        super().__init__(level=logging.WARNING)
        self.run_report = run_report

    def emit(self, record: logging.LogRecord):
        self.run_report.add_warning(record.getMessage())


# ============================================================================
# Configuration
# ============================================================================

@dataclass
class RunConfig:
    """
    Parameters of one command, merged from defaults, the JSON config file
    and command-line flags (in increasing priority).

    None means "use the experiment's own default".
    """
    command: str
    symbol: str = "whitham"
    out: Optional[str] = None
    jobs: int = 1
    reproducible: bool = False
    seed: int = 0
    verbose: int = 0

    # simulate
    init: Optional[str] = None
    length: Optional[float] = None
    modes: Optional[int] = None
    t_end: Optional[float] = None

    # experiments
    suite: Optional[str] = None
    family: Optional[str] = None
    action: Optional[str] = None
    s: Optional[float] = None
    sigma: Optional[float] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    n_list: Optional[list] = None
    lambda_list: Optional[list] = None
    t_star: Optional[float] = None
    t0: Optional[float] = None
    t: Optional[float] = None
    omega: Optional[float] = None
    floor_factor: Optional[float] = None
    periods: Optional[float] = None
    trials: Optional[int] = None
    amplitude: Optional[float] = None
    xi: Optional[list] = None

    # solver
    dt: Optional[float] = None
    cfl: Optional[float] = None
    dt_max: Optional[float] = None
    monitor_every: Optional[int] = None
    blowup_threshold: Optional[float] = None
    aux_index: Optional[float] = None
    slope_column: bool = False

    spec: Optional[SymbolSpec] = field(default=None, repr=False)

    @classmethod
    def from_sources(cls, command: str, file_values: dict, flag_values: dict) -> "RunConfig":
        """Merge defaults < config file < flags; unknown keys are configuration errors."""
        merged = dict(COMMAND_DEFAULTS.get(command, {}))
        names = {f.name for f in fields(cls)} - {"command", "spec"}
        for source in (file_values, flag_values):
            for key, value in source.items():
                key = CONFIG_ALIASES.get(key, key)
                if key in ("config", "command"):
                    continue
                if key not in names:
                    raise ConfigurationError(f"unknown configuration key {key!r}")
                merged[key] = value
        cfg = cls(command=command, **merged)
        cfg.validate()
        return cfg

    def validate(self):
        """
        Check every range before any computation starts.

        Raises:
            ConfigurationError: on the first invalid value
        """
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        self.spec = parse_symbol(str(self.symbol))
        self.jobs = int(self.jobs)
        self.slope_column = bool(self.slope_column)
        self.seed = int(self.seed)
        if self.jobs < 1:
            raise ConfigurationError(f"--jobs must be at least 1, got {self.jobs}")

        self.n_list = config_list(self.n_list, int)
        self.lambda_list = config_list(self.lambda_list, float)
        self.xi = config_list(self.xi, float)
        for name in ("n_list", "lambda_list"):
            values = getattr(self, name)
            if values is not None and (not values or min(values) <= 0):
                raise ConfigurationError(f"{name} must be a nonempty list of positive values")
        for name in ("s", "length", "t_end", "t_star", "t0", "floor_factor", "periods",
                     "dt", "dt_max", "blowup_threshold"):
            value = getattr(self, name)
            if value is not None:
                value = float(value)
                setattr(self, name, value)
                if not math.isfinite(value) or value < 0 or (value == 0 and name not in (
                        "t_end", "t_star", "t0", "floor_factor")):
                    raise ConfigurationError(f"{name} must be positive, got {value}")
        if self.modes is not None:
            self.modes = int(self.modes)
            if not is_power_of_two(self.modes) or self.modes < 8:
                raise ConfigurationError(f"--modes must be a power of two >= 8, got {self.modes}")
        if self.cfl is not None and not 0 < float(self.cfl) <= 1:
            raise ConfigurationError(f"--cfl must lie in (0, 1], got {self.cfl}")
        if self.monitor_every is not None and int(self.monitor_every) < 1:
            raise ConfigurationError(f"--monitor-every must be at least 1, got {self.monitor_every}")
        if self.trials is not None and int(self.trials) < 1:
            raise ConfigurationError(f"--trials must be at least 1, got {self.trials}")

        if self.command == "verify":
            if self.suite not in SUITES:
                raise ConfigurationError(f"--suite must be one of {', '.join(SUITES)}, got {self.suite!r}")
            if self.suite == "error-decay" and (self.family or "periodic") not in ("periodic", "line"):
                raise ConfigurationError(f"--family must be periodic or line, got {self.family!r}")
        if self.command == "symbols":
            if self.action != "eval":
                raise ConfigurationError(f"unknown symbols action {self.action!r}")
            if not self.xi:
                raise ConfigurationError("symbols eval needs --xi")
        if self.command == "simulate" and self.init is None:
            raise ConfigurationError("simulate needs --init")
        self._check_out_writable()

    def _check_out_writable(self):
        if self.out is None:
            return
        existing = Path(self.out).resolve()
        while not existing.exists():
            existing = existing.parent
        if not existing.is_dir() or not os.access(existing, os.W_OK):
            raise ConfigurationError(f"output location {self.out} is not writable")

    def solver_config(self, t_end: float = 1.0) -> Optional[SolverConfig]:
        """A SolverConfig when any solver key was given, else None."""
        keys = (self.dt, self.cfl, self.dt_max, self.monitor_every, self.blowup_threshold,
                self.aux_index)
        if all(k is None for k in keys) and self.command != "simulate":
            return None
        policy = DtPolicy.fixed(self.dt) if self.dt is not None else DtPolicy.cfl(
            float(self.cfl) if self.cfl is not None else 0.5)
        kwargs: dict[str, Any] = {"dt_policy": policy, "t_end": t_end}
        if self.dt_max is not None:
            kwargs["dt_max"] = self.dt_max
        if self.monitor_every is not None:
            kwargs["monitor_every"] = int(self.monitor_every)
        if self.blowup_threshold is not None:
            kwargs["blowup_threshold"] = self.blowup_threshold
        if self.aux_index is not None:
            kwargs["aux_norm_index"] = float(self.aux_index)
        return SolverConfig(**kwargs)

    def given(self, **mapping) -> dict[str, Any]:
        """Keyword arguments for the fields that are set, renamed per mapping."""
        return {kw: getattr(self, attr) for kw, attr in mapping.items()
                if getattr(self, attr) is not None}


# ============================================================================
# Initial data
# ============================================================================

def _numbers(text: str, count: int, spelling: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ConfigurationError(f"initial data {spelling!r} needs {count} comma-separated values")
    try:
        return [float(p) for p in parts]
    except ValueError as e:
        raise ConfigurationError(f"initial data {spelling!r}: {e}") from e


def load_initial_field(cfg: RunConfig) -> Field:
    """
    Build the initial field from its spelling.

    sine:<n>,<amp>            amp sin(2 pi n x / L) on the configured grid
    file:<path>               a saved field (.bin or x,u CSV)
    family:periodic:n,w,s     periodic approximate solution at t = 0
    family:line:lam,delta,w,s two-scale line data u_l(0) + u^h(0)
    """
    spelling = str(cfg.init)
    kind, _, rest = spelling.partition(":")
    length = cfg.length if cfg.length is not None else 2.0 * math.pi
    modes = cfg.modes if cfg.modes is not None else 256

    if kind == "sine":
        n, amp = _numbers(rest, 2, spelling)
        grid = make_grid(length, modes)
        return field_from_function(grid, lambda x: amp * np.sin(2.0 * math.pi * n * x / length))
    if kind == "file":
        return load_field(rest)
    if kind == "family":
        family, _, values = rest.partition(":")
        if family == "periodic":
            n, omega, s = _numbers(values, 3, spelling)
            if n != int(n):
                raise ConfigurationError(f"periodic frequency must be an integer, got {n}")
            p = PeriodicFamilyParams(int(n), omega, s)
            return periodic_approx(p, cfg.spec, 0.0, make_grid(length, modes))
        if family == "line":
            lam, delta, omega, s = _numbers(values, 4, spelling)
            p = LineFamilyParams(lam, delta, omega, s)
            grid = line_grid(p, modes=cfg.modes)
            return low_freq_initial(p, grid) + high_freq(p, cfg.spec, 0.0, grid)
    raise ConfigurationError(
        f"unknown initial data {spelling!r}; expected sine:, file:, family:periodic: or family:line:"
    )


# ============================================================================
# Commands
# ============================================================================

def _out_paths(cfg: RunConfig) -> tuple[Path, Path]:
    """(output directory, report document path)."""
    out = Path(cfg.out) if cfg.out else Path("output") / cfg.command
    if out.suffix.lower() == ".json":
        return out.parent, out
    return out, out / "report.json"


def run_simulate(cfg: RunConfig, run_report: RunReport) -> int:
    u0 = load_initial_field(cfg)
    if str(cfg.init).startswith("file:"):
        run_report.add_input("init", Path(str(cfg.init)[5:]), u0.grid.n_modes)
    t_end = cfg.t_end if cfg.t_end is not None else 1.0
    solver_cfg = cfg.solver_config(t_end)
    s = cfg.s if cfg.s is not None else 2.0
    print(f"Evolving {cfg.init} with {cfg.symbol} on L={u0.grid.length:g}, "
          f"N={u0.grid.n_modes} to t={t_end:g}")

    status = 0
    try:
        final, diag = evolve(u0, cfg.spec, solver_cfg, s)
    except NumericalBlowupError as e:
        run_report.add_error(str(e))
        final, diag, status = e.field, e.diagnostics, 1

    out_dir = Path(cfg.out) if cfg.out else Path("output") / "simulate"
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"\nSaving outputs to {out_dir}/...")
    outputs = []
    if final is not None:
        trajectory = out_dir / "trajectory.csv"
        save_field_csv(final, trajectory)
        binary = out_dir / "final.bin"
        save_field_binary(final, binary)
        outputs += [trajectory, binary]
    if diag is not None:
        diagnostics = out_dir / "diagnostics.csv"
        save_diagnostics_csv(diag, diagnostics, include_slope=cfg.slope_column)
        outputs.append(diagnostics)
        run_report.statistics.update(
            {k: v for k, v in diagnostics_summary(diag).items() if v is not None}
        )
    for path in outputs:
        run_report.add_output(path)
        print(f"  - {path.name}")
    _write_run_report(run_report, out_dir)
    return status


def run_experiment(cfg: RunConfig) -> ExperimentReport:
    """Dispatch an experiment command to its driver."""
    spec = cfg.spec
    jobs = cfg.jobs
    if cfg.command == "periodic-nonuniform":
        solver_cfg = cfg.solver_config(cfg.t_star)
        return run_periodic_nonuniform(
            cfg.s, spec, cfg.n_list, cfg.t_star, solver_cfg, jobs=jobs,
            **cfg.given(floor_factor="floor_factor"))
    if cfg.command == "periodic-lowreg":
        return run_periodic_lowreg(
            cfg.s, cfg.sigma, cfg.eps, spec, cfg.n_list, cfg.solver_config(), jobs=jobs,
            **cfg.given(floor_factor="floor_factor"))
    if cfg.command == "line-nonuniform":
        return run_line_nonuniform(
            cfg.s, cfg.delta, spec, cfg.lambda_list, cfg.t_star, cfg.solver_config(cfg.t_star),
            jobs=jobs, **cfg.given(floor_factor="floor_factor", periods="periods"))

    suite = cfg.suite
    if suite == "norm-lemmas":
        return verify_norm_lemmas(spec, **cfg.given(
            n_list="n_list", lambda_list="lambda_list", sigma="sigma", delta="delta", s="s",
            periods="periods"))
    if suite == "error-decay":
        return verify_error_decay(spec, cfg.family or "periodic", **cfg.given(
            s="s", sigma="sigma", omega="omega", t="t", n_list="n_list",
            lambda_list="lambda_list", delta="delta", periods="periods"))
    if suite == "scaling":
        t0 = cfg.t0 if cfg.t0 is not None else 1.0
        return verify_scaling(spec, cfg.lambda_list or (16, 32, 64), cfg.delta or 1.5,
                              cfg.solver_config(t0), t0=t0, jobs=jobs,
                              **cfg.given(omega="omega", periods="periods", modes="modes"))
    if suite == "conservation":
        t_end = cfg.t_end if cfg.t_end is not None else 1.0
        solver_cfg = cfg.solver_config(t_end)
        if solver_cfg is None:
            solver_cfg = SolverConfig(dt_policy=DtPolicy.fixed(2.0 ** -10), t_end=t_end,
                                      monitor_every=16)
        return run_conservation(spec, solver_cfg, **cfg.given(
            amplitude="amplitude", modes="modes", s="s"))
    if suite == "galilean":
        return run_galilean(spec, cfg.omega if cfg.omega is not None else 1.0,
                            cfg.t if cfg.t is not None else 0.5,
                            cfg=cfg.solver_config(), **cfg.given(
                                modes="modes", s="s", amplitude="amplitude"))
    if suite == "skew-symmetry":
        return run_skew_symmetry(spec, cfg.trials or 100, cfg.seed, **cfg.given(
            modes="modes", length="length"))
    if suite == "symbol-conditions":
        return run_symbol_conditions(spec, cfg.s if cfg.s is not None else 2.0)
    raise ConfigurationError(f"unknown suite {suite!r}")


def run_report_command(cfg: RunConfig, run_report: RunReport) -> int:
    report = run_experiment(cfg)
    report.params["seed"] = cfg.seed

    for flag in report.params.get("flags", []):
        run_report.add_warning(flag)
    for row in report.rows:
        if row.get("status") not in (None, "completed"):
            run_report.add_warning(
                f"{row.get('instance')}: {row['status']} at t={row.get('breakdown_time')}"
            )

    out_dir, report_path = _out_paths(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"\nSaving outputs to {out_dir}/...")
    save_experiment_report(report, report_path)
    run_report.add_output(report_path)
    print(f"  - {report_path.name}")
    summary = generate_text_summary(report)
    summary_path = report_path.with_suffix(".txt")
    with open(summary_path, 'w') as f:
        f.write(summary)
        f.write("\n")
    run_report.add_output(summary_path)
    print(f"  - {summary_path.name}")
    if report.trajectories:
        traj_dir = out_dir / f"{report_path.stem}_trajectories"
        written = save_trajectories(report, traj_dir, include_slope=cfg.slope_column)
        for path in written:
            run_report.add_output(path)
        print(f"  - {traj_dir.name}/ ({len(written)} files)")

    run_report.statistics["verdicts"] = len(report.verdicts)
    run_report.statistics["failed_verdicts"] = ", ".join(report.failed_verdicts) or "none"
    _write_run_report(run_report, out_dir)
    print("\n")
    print(summary)
    return 0 if report.passed else 1


def run_symbols_eval(cfg: RunConfig) -> int:
    xi = np.asarray(cfg.xi, dtype=float)
    write_columns(sys.stdout, ("xi", "m"), xi, eval_symbol(cfg.spec, xi))
    return 0


def _write_run_report(run_report: RunReport, out_dir: Path):
    run_report.finalize()
    json_path = out_dir / "run_report.json"
    txt_path = out_dir / "run_report.txt"
    run_report.add_output(json_path)
    run_report.add_output(txt_path)
    save_json(run_report.to_dict(), json_path)
    with open(txt_path, 'w') as f:
        f.write(run_report.generate_text_report())
        f.write("\n")
    print(f"  - {json_path.name}")
    print(f"  - {txt_path.name}")


# ============================================================================
# Argument parsing
# ============================================================================

def _add(parser: argparse.ArgumentParser, *names, **kwargs):
    parser.add_argument(*names, default=argparse.SUPPRESS, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    """
    Every flag defaults to SUPPRESS so that only flags actually given
    override the config file.
    """
    common = argparse.ArgumentParser(add_help=False)
    _add(common, "--out", help="Output directory, or report path ending in .json")
    _add(common, "--jobs", type=int, help="Worker processes for independent instances")
    _add(common, "--reproducible", action="store_true",
         help="Omit timestamps so repeated runs write identical files")
    common.add_argument("--config", type=Path, default=None,
                        help="JSON config file; flags override its values")
    _add(common, "--seed", type=int, help="Random seed (recorded in every report)")
    _add(common, "-v", "--verbose", action="count",
         help="Log progress (-v) or debugging detail (-vv)")
    _add(common, "--symbol", help="whitham | kdv | bo | zero | fkdv:<alpha> | custom:<path>")

    solver = argparse.ArgumentParser(add_help=False)
    _add(solver, "--dt", type=float, help="Fixed time step (default: CFL)")
    _add(solver, "--cfl", type=float, help="CFL safety factor in (0, 1]")
    _add(solver, "--dt-max", type=float)
    _add(solver, "--monitor-every", type=int, help="Steps between diagnostics snapshots")
    _add(solver, "--blowup-threshold", type=float)
    _add(solver, "--aux-index", type=float, help="Record an auxiliary H^r norm")
    _add(solver, "--slope-column", action="store_true",
         help="Append max_slope to the diagnostics CSVs")

    parser = argparse.ArgumentParser(
        prog="whitham-flowmap",
        description="Whitham flow-map toolkit - non-uniform continuity experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Example usage:
    whitham-flowmap simulate --symbol whitham --init sine:1,1.0 --modes 256 --out run/
    whitham-flowmap periodic-nonuniform --s 2.0 --n 32,64,128,256 --out report.json
    whitham-flowmap verify --suite error-decay --family periodic --s 2.0 --sigma 0
    whitham-flowmap symbols eval --symbol fkdv:1.5 --xi 0,1,10

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 configuration error.
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, solver], help="Evolve initial data")
    _add(p, "--init", help="sine:<n>,<amp> | file:<path> | family:periodic:n,w,s | "
                           "family:line:lam,delta,w,s")
    _add(p, "--L", dest="length", type=float, help="Torus length")
    _add(p, "--modes", type=int, help="Number of grid points (power of two)")
    _add(p, "--t-end", type=float)
    _add(p, "--s", type=float, help="Sobolev index of the monitored norm")

    p = sub.add_parser("periodic-nonuniform", parents=[common, solver],
                       help="Non-uniform dependence on the torus for s > 3/2")
    _add(p, "--s", type=float)
    _add(p, "--n", dest="n_list", help="Comma-separated frequencies")
    _add(p, "--t-star", type=float)
    _add(p, "--floor-factor", type=float)

    p = sub.add_parser("periodic-lowreg", parents=[common, solver],
                       help="Non-uniform dependence on the torus for s <= 3/2")
    _add(p, "--s", type=float)
    _add(p, "--sigma", type=float)
    _add(p, "--eps", type=float)
    _add(p, "--n", dest="n_list")
    _add(p, "--floor-factor", type=float)

    p = sub.add_parser("line-nonuniform", parents=[common, solver],
                       help="Non-uniform dependence on the line")
    _add(p, "--s", type=float)
    _add(p, "--delta", type=float)
    _add(p, "--lambda", dest="lambda_list", help="Comma-separated carrier frequencies")
    _add(p, "--t-star", type=float)
    _add(p, "--periods", type=float, help="Torus length in envelope widths")
    _add(p, "--floor-factor", type=float)

    p = sub.add_parser("verify", parents=[common, solver], help="Verification suites")
    _add(p, "--suite", choices=SUITES)
    _add(p, "--family", choices=("periodic", "line"))
    _add(p, "--s", type=float)
    _add(p, "--sigma", type=float)
    _add(p, "--delta", type=float)
    _add(p, "--n", dest="n_list")
    _add(p, "--lambda", dest="lambda_list")
    _add(p, "--omega", type=float)
    _add(p, "--t", type=float)
    _add(p, "--t0", type=float)
    _add(p, "--t-end", type=float)
    _add(p, "--modes", type=int)
    _add(p, "--periods", type=float)
    _add(p, "--trials", type=int)
    _add(p, "--amplitude", type=float)
    _add(p, "--L", dest="length", type=float)

    p = sub.add_parser("symbols", parents=[common], help="Evaluate a symbol")
    p.add_argument("action", choices=("eval",))
    _add(p, "--xi", help="Comma-separated wavenumbers")
    return parser


def _configure_logging(verbosity: int, run_report: RunReport) -> logging.Handler:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    collector = _WarningCollector(run_report)
    logging.getLogger("whitham_flowmap").addHandler(collector)
    return collector


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    flags = vars(args)
    command = flags.pop("command")
    config_path = flags.pop("config", None)
    try:
        cfg = RunConfig.from_sources(command, load_run_config(config_path), flags)
    except ConfigurationError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 2

    run_report = RunReport(command, reproducible=cfg.reproducible)
    collector = _configure_logging(cfg.verbose, run_report)
    if config_path is not None:
        run_report.add_input("config", config_path)

    try:
        if command == "symbols":
            return run_symbols_eval(cfg)
        if command == "simulate":
            return run_simulate(cfg, run_report)
        return run_report_command(cfg, run_report)
    except ConfigurationError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception("run failed")
        run_report.add_error(str(e))
        print(f"\nERROR: {e}")
        print(run_report.generate_text_report())
        return 1
    finally:
        logging.getLogger("whitham_flowmap").removeHandler(collector)


if __name__ == "__main__":
    sys.exit(main())
