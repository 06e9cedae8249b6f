"""Flat key-value scenario configuration.

Line format is `section.key = value` with `#` comments.  Unknown keys are
rejected so a typo in a physics parameter cannot pass silently.  The same
module defines the canonical serialization used for config hashing: same
config, same bytes, same hash.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass

from .csl import CslParams, MassDensity
from .dynamics import InputNoiseSpec, SystemParams


class ConfigError(ValueError):
    """Malformed, unknown, missing or inconsistent configuration input."""


@dataclass(frozen=True)
class MeasurementConfig:
    """POVM settings shared by both readout schemes of a run."""

    l: float = 1.0
    theta: float = 0.0
    phi_bs: float = math.pi / 4
    epr_output: str = "minus"

    def __post_init__(self):
        if self.epr_output not in ("minus", "plus"):
            raise ValueError("epr_output must be 'minus' or 'plus'")


@dataclass(frozen=True)
class GridSpec:
    """Either a transient time grid or the steady-state marker."""

    mode: str
    start: float | None = None
    stop: float | None = None
    steps: int | None = None

    def __post_init__(self):
        if self.mode not in ("time", "steady"):
            raise ValueError("grid mode must be 'time' or 'steady'")
        if self.mode == "time":
            if self.start is None or self.stop is None or self.steps is None:
                raise ValueError("time grid needs start, stop and steps")
            if self.start < 0 or self.stop < self.start or self.steps < 1:
                raise ValueError("time grid must satisfy 0 <= start <= stop, steps >= 1")
            if self.steps > 1 and self.stop == self.start:
                raise ValueError("time grid with several steps needs stop > start")
        else:
            if self.start is not None or self.stop is not None or self.steps is not None:
                raise ValueError("steady mode takes no start/stop/steps keys")


@dataclass(frozen=True)
class SweepSpec:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(
                f"sweep.name {self.name!r} is not a recognized parameter path; "
                f"choose one of {sorted(SWEEPABLE)}")
        if self.count < 1:
            raise ValueError("sweep.count must be at least 1")
        if self.scale not in ("linear", "log"):
            raise ValueError("sweep.scale must be 'linear' or 'log'")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log sweep needs strictly positive endpoints")


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemParams
    noise: InputNoiseSpec
    measurement: MeasurementConfig
    grid: GridSpec
    csl: CslParams | None = None
    csl_density: MassDensity | None = None
    sweep: SweepSpec | None = None


#: parameter paths a sweep may vary
SWEEPABLE = {
    "noise.r", "noise.n1", "noise.n2", "noise.psi_s",
    "system.lambda_csl", "system.g", "system.temperature",
    "system.kappa", "system.gamma_m", "system.delta1", "system.delta2",
    "measurement.l", "measurement.theta",
}

# key -> (kind, unit, required, description); kind is float/int/str
KEY_TABLE = [
    ("system.omega_m", "float", "rad/s", True, "mechanical angular frequency"),
    ("system.gamma_m", "float", "1/s", True, "mechanical damping rate"),
    ("system.kappa", "float", "1/s", True, "cavity decay rate (both cavities)"),
    ("system.delta1", "float", "rad/s", True, "cavity-1 detuning"),
    ("system.delta2", "float", "rad/s", True, "cavity-2 detuning"),
    ("system.g", "float", "rad/s", True, "linearized optomechanical coupling"),
    ("system.temperature", "float", "K", True, "environment temperature"),
    ("system.lambda_csl", "float", "1/s", True,
     "collapse diffusion rate (overridden by the csl section when present)"),
    ("csl.lambda_csl", "float", "1/s", False, "fundamental collapse rate"),
    ("csl.r_csl", "float", "m", False, "collapse correlation length"),
    ("csl.mass", "float", "kg", False, "test-mass mass"),
    ("csl.shape", "str", "sphere|cube", False, "test-mass geometry"),
    ("csl.dimension", "float", "m", False, "sphere radius or cube side"),
    ("noise.kind", "str", "thermal|tms", True, "driving-noise family"),
    ("noise.n1", "float", "photons", False, "thermal occupation, cavity 1 input"),
    ("noise.n2", "float", "photons", False, "thermal occupation, cavity 2 input"),
    ("noise.r", "float", "dimensionless", False, "two-mode squeezing amplitude"),
    ("noise.psi_s", "float", "rad", False, "two-mode squeezing angle"),
    ("measurement.l", "float", "dimensionless", False,
     "POVM squeezing (1 = heterodyne; clamp bounds = homodyne limits)"),
    ("measurement.theta", "float", "rad", False, "POVM direction"),
    ("measurement.phi_bs", "float", "rad", False, "beam-splitter angle (epr readout)"),
    ("measurement.epr_output", "str", "minus|plus", False,
     "beam-splitter output slot read by the epr scheme"),
    ("grid.mode", "str", "time|steady", True, "transient grid or steady state"),
    ("grid.start", "float", "s", False, "first output time"),
    ("grid.stop", "float", "s", False, "last output time"),
    ("grid.steps", "int", "count", False, "number of output times"),
    ("sweep.name", "str", "parameter path", False, "parameter to sweep"),
    ("sweep.start", "float", "target units", False, "first sweep value"),
    ("sweep.stop", "float", "target units", False, "last sweep value"),
    ("sweep.count", "int", "count", False, "number of sweep points"),
    ("sweep.scale", "str", "linear|log", False, "sweep spacing"),
]

_KEY_KINDS = {key: kind for key, kind, *_ in KEY_TABLE}

_DEFAULTS = {
    "noise.n1": 0.0,
    "noise.n2": 0.0,
    "noise.r": 0.0,
    "noise.psi_s": 0.0,
    "measurement.l": 1.0,
    "measurement.theta": 0.0,
    "measurement.phi_bs": math.pi / 4,
    "measurement.epr_output": "minus",
    "sweep.scale": "linear",
}

_CSL_KEYS = ("csl.lambda_csl", "csl.r_csl", "csl.mass", "csl.shape", "csl.dimension")
_SWEEP_KEYS = ("sweep.name", "sweep.start", "sweep.stop", "sweep.count", "sweep.scale")


def _convert(key: str, raw: str):
    kind = _KEY_KINDS[key]
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {kind}") from exc


def parse_config_text(text: str) -> ScenarioConfig:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _KEY_KINDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not raw:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
        values[key] = _convert(key, raw)
    return _assemble(values)


def _take(values, key, default=None):
    if key in values:
        return values.pop(key)
    if key in _DEFAULTS:
        return _DEFAULTS[key]
    return default


def _require(values, key):
    if key not in values:
        raise ConfigError(f"missing required key {key!r}")
    return values.pop(key)


def _assemble(values: dict) -> ScenarioConfig:
    values = dict(values)
    try:
        system = SystemParams(
            omega_m=_require(values, "system.omega_m"),
            gamma_m=_require(values, "system.gamma_m"),
            kappa=_require(values, "system.kappa"),
            delta1=_require(values, "system.delta1"),
            delta2=_require(values, "system.delta2"),
            g=_require(values, "system.g"),
            temperature=_require(values, "system.temperature"),
            lambda_csl=_require(values, "system.lambda_csl"),
        )
        csl = None
        density = None
        present = [k for k in _CSL_KEYS if k in values]
        if present:
            missing = [k for k in _CSL_KEYS if k not in values]
            if missing:
                raise ConfigError(
                    f"csl section is all-or-none; missing {missing}")
            density = MassDensity(shape=values.pop("csl.shape"),
                                  mass=values["csl.mass"],
                                  dimension=values.pop("csl.dimension"))
            csl = CslParams(lambda_rate=values.pop("csl.lambda_csl"),
                            r_c=values.pop("csl.r_csl"),
                            mass=values.pop("csl.mass"),
                            omega_m=system.omega_m)
        noise = InputNoiseSpec(kind=_require(values, "noise.kind"),
                               n1=_take(values, "noise.n1"),
                               n2=_take(values, "noise.n2"),
                               r=_take(values, "noise.r"),
                               psi_s=_take(values, "noise.psi_s"))
        measurement = MeasurementConfig(l=_take(values, "measurement.l"),
                                        theta=_take(values, "measurement.theta"),
                                        phi_bs=_take(values, "measurement.phi_bs"),
                                        epr_output=_take(values, "measurement.epr_output"))
        grid = GridSpec(mode=_require(values, "grid.mode"),
                        start=_take(values, "grid.start"),
                        stop=_take(values, "grid.stop"),
                        steps=_take(values, "grid.steps"))
        sweep = None
        sweep_present = [k for k in _SWEEP_KEYS if k in values]
        if sweep_present:
            needed = ("sweep.name", "sweep.start", "sweep.stop", "sweep.count")
            missing = [k for k in needed if k not in values]
            if missing:
                raise ConfigError(f"sweep section incomplete; missing {missing}")
            sweep = SweepSpec(name=values.pop("sweep.name"),
                              start=values.pop("sweep.start"),
                              stop=values.pop("sweep.stop"),
                              count=values.pop("sweep.count"),
                              scale=_take(values, "sweep.scale"))
        if sweep is not None and sweep.name == "system.lambda_csl" and csl is not None:
            raise ConfigError(
                "cannot sweep system.lambda_csl while the csl section overrides it")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if values:
        raise ConfigError(f"unused keys: {sorted(values)}")
    return ScenarioConfig(system=system, noise=noise, measurement=measurement,
                          grid=grid, csl=csl, csl_density=density, sweep=sweep)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def serialize_config(config: ScenarioConfig) -> str:
    """Canonical text form: every resolved key, fixed order, repr floats.

    parse_config_text(serialize_config(c)) == c, and the bytes are the
    hashing input, so identical configs always hash identically.
    """
    s = config.system
    lines = [
        f"system.omega_m = {s.omega_m!r}",
        f"system.gamma_m = {s.gamma_m!r}",
        f"system.kappa = {s.kappa!r}",
        f"system.delta1 = {s.delta1!r}",
        f"system.delta2 = {s.delta2!r}",
        f"system.g = {s.g!r}",
        f"system.temperature = {s.temperature!r}",
        f"system.lambda_csl = {s.lambda_csl!r}",
    ]
    if config.csl is not None:
        c, d = config.csl, config.csl_density
        lines += [
            f"csl.lambda_csl = {c.lambda_rate!r}",
            f"csl.r_csl = {c.r_c!r}",
            f"csl.mass = {c.mass!r}",
            f"csl.shape = {d.shape}",
            f"csl.dimension = {d.dimension!r}",
        ]
    n = config.noise
    lines += [
        f"noise.kind = {n.kind}",
        f"noise.n1 = {n.n1!r}",
        f"noise.n2 = {n.n2!r}",
        f"noise.r = {n.r!r}",
        f"noise.psi_s = {n.psi_s!r}",
    ]
    m = config.measurement
    lines += [
        f"measurement.l = {m.l!r}",
        f"measurement.theta = {m.theta!r}",
        f"measurement.phi_bs = {m.phi_bs!r}",
        f"measurement.epr_output = {m.epr_output}",
    ]
    g = config.grid
    lines.append(f"grid.mode = {g.mode}")
    if g.mode == "time":
        lines += [
            f"grid.start = {g.start!r}",
            f"grid.stop = {g.stop!r}",
            f"grid.steps = {g.steps!r}",
        ]
    if config.sweep is not None:
        w = config.sweep
        lines += [
            f"sweep.name = {w.name}",
            f"sweep.start = {w.start!r}",
            f"sweep.stop = {w.stop!r}",
            f"sweep.count = {w.count!r}",
            f"sweep.scale = {w.scale}",
        ]
    return "\n".join(lines) + "\n"


def config_hash(config: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode()).hexdigest()[:16]


def effective_system(config: ScenarioConfig) -> SystemParams:
    """System parameters with the collapse rate resolved: the csl section,
    when present, overrides system.lambda_csl."""
    if config.csl is None:
        return config.system
    from .csl import csl_diffusion_rate  # local import only to delay quadrature

    rate = csl_diffusion_rate(config.csl, config.csl_density)
    return dataclasses.replace(config.system, lambda_csl=rate)


def apply_sweep_value(config: ScenarioConfig, name: str, value: float) -> ScenarioConfig:
    if name not in SWEEPABLE:
        raise ConfigError(f"{name!r} is not a sweepable parameter path")
    section, field = name.split(".", 1)
    try:
        if section == "system":
            return dataclasses.replace(
                config, system=dataclasses.replace(config.system, **{field: value}))
        if section == "noise":
            return dataclasses.replace(
                config, noise=dataclasses.replace(config.noise, **{field: value}))
        return dataclasses.replace(
            config, measurement=dataclasses.replace(config.measurement, **{field: value}))
    except ValueError as exc:
        raise ConfigError(f"sweep value {value!r} invalid for {name}: {exc}") from exc


def key_table_text() -> str:
    """Human-readable key table for --help and the docs."""
    width = max(len(key) for key, *_ in KEY_TABLE)
    out = []
    for key, kind, unit, required, desc in KEY_TABLE:
        req = "required" if required else "optional"
        out.append(f"  {key.ljust(width)}  {kind:<5} [{unit}] ({req}) {desc}")
    return "\n".join(out)
