"""Scenario drivers: the transient strategy comparison and the
steady-state parameter sweep, plus deterministic CSV output.

Column semantics: the classical-strategy pair is thermal driving with a
local readout of cavity 1; the quantum-strategy pair is two-mode-squeezed
driving with the EPR readout.  The steady sweep drives with the tagged
noise of the config and compares the two readout schemes on the same
steady state.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, apply_sweep_value, config_hash, effective_system
from .dynamics import (
    NonHurwitzError,
    build_diffusion,
    build_drift,
    evolve,
    initial_state,
    steady_state,
)
from .estimation import MeasurementSpec, point_fisher, strategy_fisher
from .gaussian import Mode

UNITS_NOTE = "per-shot-FI-for-Lambda-in-inverse-seconds"

FLAG_NON_HURWITZ = "non-hurwitz"

_CLASSICAL_COLS = ["cfi_classical_strategy", "qfi_classical_strategy"]
_QUANTUM_COLS = ["cfi_quantum_strategy", "qfi_quantum_strategy"]


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)


def _check_strategy(strategy: str) -> None:
    if strategy not in ("classical", "quantum", "both"):
        raise ConfigError(f"strategy must be classical, quantum or both, got {strategy!r}")


def _columns_for(first: str, strategy: str) -> list[str]:
    cols = [first]
    if strategy in ("classical", "both"):
        cols += _CLASSICAL_COLS
    if strategy in ("quantum", "both"):
        cols += _QUANTUM_COLS
    return cols + ["flags"]


def _merge_flags(*flags: str) -> str:
    for f in flags:
        if f:
            return f
    return ""


def _epr_target(config: ScenarioConfig) -> int:
    return Mode.EPR_MINUS if config.measurement.epr_output == "minus" else Mode.EPR_PLUS


def _local_spec(config: ScenarioConfig) -> MeasurementSpec:
    m = config.measurement
    return MeasurementSpec(scheme="local", l=m.l, theta=m.theta,
                           target=Mode.CAVITY1)


def _epr_spec(config: ScenarioConfig) -> MeasurementSpec:
    m = config.measurement
    return MeasurementSpec(scheme="epr", l=m.l, theta=m.theta,
                           phi_bs=m.phi_bs, target=_epr_target(config))


def run_transient(config: ScenarioConfig, strategy: str = "both") -> ResultTable:
    """Time-resolved Fisher information of the two strategies.

    Both strategies start from the same pre-drive state and evolve under
    their own driving noise.
    """
    _check_strategy(strategy)
    if config.grid.mode != "time":
        raise ConfigError("transient run needs grid.mode = time")
    params = effective_system(config)
    A = build_drift(params)
    sigma0, sens0 = initial_state(params)
    times = np.linspace(config.grid.start, config.grid.stop, config.grid.steps)

    series = {}
    if strategy in ("classical", "both"):
        noise = config.noise.as_thermal()
        traj = evolve(A, build_diffusion(params, noise), sigma0, times, sens0)
        series["classical"] = strategy_fisher(traj, noise, _local_spec(config))
    if strategy in ("quantum", "both"):
        noise = config.noise.as_tms()
        traj = evolve(A, build_diffusion(params, noise), sigma0, times, sens0)
        series["quantum"] = strategy_fisher(traj, noise, _epr_spec(config))

    rows = []
    for i, t in enumerate(times):
        row = [float(t)]
        flags = []
        for name in ("classical", "quantum"):
            if name in series:
                res = series[name][i]
                row += [res.cfi, res.qfi]
                flags.append(res.flag)
        row.append(_merge_flags(*flags))
        rows.append(row)
    return ResultTable(columns=_columns_for("time", strategy), rows=rows,
                       meta=_meta(config))


def run_steady_sweep(config: ScenarioConfig, strategy: str = "both") -> ResultTable:
    """Steady-state Fisher information against a swept parameter.

    Sweep points whose drift is not Hurwitz stable are flagged and skipped;
    the sweep continues.
    """
    _check_strategy(strategy)
    if config.grid.mode != "steady":
        raise ConfigError("steady sweep needs grid.mode = steady")
    if config.sweep is None:
        raise ConfigError("steady sweep needs a sweep section")
    sw = config.sweep
    if sw.scale == "log":
        values = np.geomspace(sw.start, sw.stop, sw.count)
    else:
        values = np.linspace(sw.start, sw.stop, sw.count)

    n_value_cols = 4 if strategy == "both" else 2
    rows = []
    for v in values:
        cfg = apply_sweep_value(config, sw.name, float(v))
        params = effective_system(cfg)
        A = build_drift(params)
        D = build_diffusion(params, cfg.noise)
        try:
            sigma, sens = steady_state(A, D)
        except NonHurwitzError:
            rows.append([float(v)] + [math.nan] * n_value_cols + [FLAG_NON_HURWITZ])
            continue
        row = [float(v)]
        flags = []
        if strategy in ("classical", "both"):
            cfi, qfi, flag = point_fisher(sigma, sens, _local_spec(cfg))
            row += [cfi, qfi]
            flags.append(flag)
        if strategy in ("quantum", "both"):
            cfi, qfi, flag = point_fisher(sigma, sens, _epr_spec(cfg))
            row += [cfi, qfi]
            flags.append(flag)
        row.append(_merge_flags(*flags))
        rows.append(row)
    return ResultTable(columns=_columns_for(sw.name, strategy), rows=rows,
                       meta=_meta(config))


def _meta(config: ScenarioConfig) -> dict:
    return {"config_hash": config_hash(config), "version": __version__,
            "units": UNITS_NOTE}


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    return f"{value:.12g}"


def emit_csv(table: ResultTable, path) -> None:
    """Write the table as UTF-8 CSV with a pinned comment header.

    Output is byte deterministic for a given table.  The file is written
    under a temporary name and renamed into place so interrupted runs
    leave no partial output at the target path.
    """
    lines = [f"# config-hash={table.meta['config_hash']} units={table.meta['units']}"]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    text = "\n".join(lines) + "\n"
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            if os.path.exists(tmp):
                os.unlink(tmp)
        except OSError:
            pass
        raise OSError(f"while writing {path}: {exc}") from exc
