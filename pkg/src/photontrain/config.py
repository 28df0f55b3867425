"""Scenario configuration: flat ``key = value`` files and named presets.

Frequencies at this boundary are ordinary frequencies in MHz and times
are in us; :class:`Scenario` converts to the internal angular units.
Physical and pulse keys are mandatory unless a preset base is named with
``preset = <name>``; run-control keys (grids, toggles, solver settings,
sweep) fall back to built-in defaults.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .params import DerivedRates, RawParams, derive
from .pulses import PulseTrain, ShapeKind, SubpulseShape

__all__ = [
    "ConfigError",
    "Scenario",
    "PRESETS",
    "PRESET_VERSION",
    "INTEGER_KEYS",
    "load_config",
    "parse_config_text",
    "dump_config",
    "scenario_from_values",
    "with_overrides",
]

TWO_PI = 2.0 * math.pi
PRESET_VERSION = 1


class ConfigError(ValueError):
    """Bad configuration: parse error, unknown key, or invalid value."""


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _nonneg(text: str) -> float:
    value = _float(text)
    if value < 0:
        raise ValueError("must be >= 0")
    return value


def _positive(text: str) -> float:
    value = _float(text)
    if value <= 0:
        raise ValueError("must be > 0")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 0:
        raise ValueError("must be >= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be >= 1")
    return value


def _switch(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError("expected on/off")


def _shape(text: str) -> str:
    return ShapeKind(text.strip()).value


def _optional_time(text: str):
    if text.strip().lower() == "auto":
        return "auto"
    return _positive(text)


def _float_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    return tuple(_float(p) for p in parts)


def _int_list(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    return tuple(_positive_int(p) for p in parts)


def _text(text: str) -> str:
    return text.strip()


# key -> (parser, required)
SCHEMA: dict[str, tuple[Callable[[str], Any], bool]] = {
    "g1_mhz": (_nonneg, True),
    "g2_mhz": (_nonneg, True),
    "omega1_mhz": (_nonneg, True),
    "omega2_mhz": (_nonneg, True),
    "delta1_mhz": (_positive, True),
    "delta2_mhz": (_positive, True),
    "kappa_mhz": (_positive, True),
    "gamma_42_mhz": (_nonneg, True),
    "gamma_31_mhz": (_nonneg, True),
    "gamma_4out_mhz": (_nonneg, True),
    "gamma_3out_mhz": (_nonneg, True),
    "gamma_sp_mhz": (_nonneg, True),
    "delta_b_mhz": (_nonneg, True),
    "shape": (_shape, True),
    "duration_us": (_nonneg, True),
    "n_subpulses": (_count, True),
    "tau_d_us": (_positive, True),
    "period_us": (_optional_time, False),
    "t_first_us": (_float, True),
    "points_per_fwhm": (_positive_int, False),
    "tau_max_us": (_optional_time, False),
    "losses": (_switch, False),
    "oracle": (_switch, False),
    "n_max": (_positive_int, False),
    "fock_cutoffs": (_int_list, False),
    "rel_tol": (_positive, False),
    "abs_tol": (_positive, False),
    "sweep_param": (_text, False),
    "sweep_values": (_float_list, False),
}

RUN_DEFAULTS: dict[str, Any] = {
    "period_us": "auto",
    "points_per_fwhm": 40,
    "tau_max_us": "auto",
    "losses": True,
    "oracle": False,
    "n_max": 3,
    "fock_cutoffs": (1, 2, 3),
    "rel_tol": 1e-9,
    "abs_tol": 1e-12,
    "sweep_param": "",
    "sweep_values": (),
}

_REFERENCE = {
    "g1_mhz": 10.0,
    "g2_mhz": 10.0,
    "omega1_mhz": 10.0,
    "omega2_mhz": 10.0,
    "delta1_mhz": 100.0,
    "delta2_mhz": 100.0,
    "kappa_mhz": 3.0,
    "gamma_42_mhz": 0.0,
    "gamma_31_mhz": 0.0,
    # alpha / Gamma_out = 70 with the couplings above
    "gamma_4out_mhz": 40.0 / 21.0,
    "gamma_3out_mhz": 40.0 / 21.0,
    "gamma_sp_mhz": 6.0,
    "delta_b_mhz": 14.0,
    "shape": "gaussian",
    "duration_us": 1.0,
    "n_subpulses": 4,
    "tau_d_us": 3.0,
    "period_us": 6.0,
    "t_first_us": 0.0,
}

PRESETS: dict[str, dict[str, Any]] = {
    "paper-d1": {**RUN_DEFAULTS, **_REFERENCE},
    "paper-d2": {**RUN_DEFAULTS, **_REFERENCE, "gamma_4out_mhz": 0.0, "gamma_3out_mhz": 0.0},
}

_NUMERIC_KEYS = [k for k, (p, _) in SCHEMA.items()
                 if p in (_nonneg, _positive, _float, _count, _positive_int)]
INTEGER_KEYS = frozenset(k for k, (p, _) in SCHEMA.items() if p in (_count, _positive_int))


@dataclass(frozen=True)
class Grids:
    points_per_fwhm: int
    tau_max_us: float | str


@dataclass(frozen=True)
class Toggles:
    losses: bool
    oracle: bool


@dataclass(frozen=True)
class Scenario:
    """Resolved run description.

    ``values`` holds every key in boundary units and is the canonical
    record; the typed fields are derived from it.
    """

    name: str
    values: tuple[tuple[str, Any], ...]
    raw_params: RawParams
    train: PulseTrain
    grids: Grids
    toggles: Toggles

    def get(self, key: str):
        return dict(self.values)[key]

    @property
    def derived(self) -> DerivedRates:
        rates = derive(self.raw_params)
        return rates if self.toggles.losses else rates.lossless()

    @property
    def rel_tol(self) -> float:
        return self.get("rel_tol")

    @property
    def abs_tol(self) -> float:
        return self.get("abs_tol")

    @property
    def tau_max(self) -> float:
        t = self.grids.tau_max_us
        if t == "auto":
            return self.train.n_subpulses * self.train.period
        return t


def scenario_from_values(name: str, values: dict[str, Any]) -> Scenario:
    """Build a :class:`Scenario` from fully resolved boundary-unit values."""
    missing = [k for k, (_, required) in SCHEMA.items() if required and k not in values]
    if missing:
        raise ConfigError(f"missing keys (and no preset base named): {', '.join(missing)}")
    unknown = [k for k in values if k not in SCHEMA]
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    v = {**RUN_DEFAULTS, **values}
    try:
        raw = RawParams(
            g1=TWO_PI * v["g1_mhz"], g2=TWO_PI * v["g2_mhz"],
            omega1=TWO_PI * v["omega1_mhz"], omega2=TWO_PI * v["omega2_mhz"],
            delta1=TWO_PI * v["delta1_mhz"], delta2=TWO_PI * v["delta2_mhz"],
            kappa=TWO_PI * v["kappa_mhz"],
            gamma_42=TWO_PI * v["gamma_42_mhz"], gamma_31=TWO_PI * v["gamma_31_mhz"],
            gamma_4out=TWO_PI * v["gamma_4out_mhz"], gamma_3out=TWO_PI * v["gamma_3out_mhz"],
            gamma_sp=TWO_PI * v["gamma_sp_mhz"], delta_B=TWO_PI * v["delta_b_mhz"],
        )
        train = PulseTrain(
            shape=SubpulseShape(ShapeKind(v["shape"]), v["duration_us"]),
            n_subpulses=v["n_subpulses"],
            tau_d=v["tau_d_us"],
            period=None if v["period_us"] == "auto" else v["period_us"],
            t_first=v["t_first_us"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if v["sweep_param"] and v["sweep_param"] not in _NUMERIC_KEYS:
        raise ConfigError(f"sweep_param must name a numeric key, got {v['sweep_param']!r}")
    ordered = tuple((k, v[k]) for k in SCHEMA)
    return Scenario(
        name=name,
        values=ordered,
        raw_params=raw,
        train=train,
        grids=Grids(v["points_per_fwhm"], v["tau_max_us"]),
        toggles=Toggles(v["losses"], v["oracle"]),
    )


def _parse_value(key: str, text: str, where: str):
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    parser, _ = SCHEMA[key]
    try:
        return parser(text)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {text.strip()!r} ({exc})") from None


def _split_line(line: str, where: str) -> tuple[str, str] | None:
    stripped = line.split("#", 1)[0].strip()
    if not stripped:
        return None
    if "=" not in stripped:
        raise ConfigError(f"{where}: expected 'key = value', got {line.strip()!r}")
    key, value = stripped.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"{where}: empty key")
    return key, value.strip()


def parse_config_text(text: str, source: str = "<config>", base: str | None = None) -> Scenario:
    """Parse ``key = value`` text into a :class:`Scenario`.

    The special keys ``preset`` (base preset) and ``name`` (scenario
    label) are accepted in addition to the schema keys.  ``base`` names a
    preset to start from; it must agree with any ``preset`` line.
    """
    entries: dict[str, Any] = {}
    preset = base
    name = None
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{source}:{lineno}"
        kv = _split_line(line, where)
        if kv is None:
            continue
        key, value = kv
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        seen.add(key)
        if key == "preset":
            if base is not None and value != base:
                raise ConfigError(f"{where}: preset {value!r} conflicts with requested base {base!r}")
            if value not in PRESETS:
                raise ConfigError(f"{where}: unknown preset {value!r}")
            preset = value
        elif key == "name":
            name = value
        else:
            entries[key] = _parse_value(key, value, where)
    if preset is not None:
        values = {**PRESETS[preset], **entries}
    else:
        values = {**RUN_DEFAULTS, **entries}
    return scenario_from_values(name or preset or Path(source).stem, values)


def load_config(source: str | Path, overrides: list[str] | None = None,
                base: str | None = None) -> Scenario:
    """Load a scenario from a preset name or a config file path.

    ``overrides`` are extra ``key=value`` strings applied last.
    """
    source_str = str(source)
    if source_str in PRESETS and not Path(source_str).is_file():
        text, label = f"preset = {source_str}\n", source_str
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        label = str(path)
    scenario = parse_config_text(text, label, base=base)
    if overrides:
        scenario = with_overrides(scenario, overrides)
    return scenario


def with_overrides(scenario: Scenario, overrides: list[str]) -> Scenario:
    values = dict(scenario.values)
    for i, item in enumerate(overrides, start=1):
        kv = _split_line(item, f"override {i}")
        if kv is None:
            raise ConfigError(f"override {i}: empty")
        key, value = kv
        values[key] = _parse_value(key, value, f"override {i}")
    return scenario_from_values(scenario.name, values)


def _format(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def dump_config(scenario: Scenario) -> str:
    """Serialise every resolved key; :func:`parse_config_text` reads it back exactly."""
    lines = [f"name = {scenario.name}"]
    lines += [f"{k} = {_format(v)}" for k, v in scenario.values]
    return "\n".join(lines) + "\n"
