"""``key = value`` run configuration with command-line overrides.

Precedence: ``--set`` overrides > config file > built-in defaults.  Values in
dB are turned into linear ratios here and nowhere else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Optional

from .capture import CaptureParams
from .params import CAPTURE_SEMANTICS, TIMING_MODES, ChannelParams, MacParams, db_to_linear
from .phy import SER_FORMULAS
from .simulator import CAPTURE_MODES

MODES = ("solve", "simulate", "sweep", "figures")
SWEEP_AXES = ("sinr_db", "stations", "capture_db", "payload_bytes")
RATES = (1.0, 2.0, 5.5, 11.0)


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "config"):
        where = f"{source}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(map(str, options))}, got {text!r}")
        return text
    return parse


def _rate(text):
    v = float(text)
    if v not in RATES:
        raise ValueError("expected one of 1, 2, 5.5, 11")
    return v


@dataclass(frozen=True)
class Key:
    name: str
    parse: Callable[[str], object]
    default: object
    unit: str
    help: str
    check: Optional[Callable[[object], bool]] = None
    rule: str = ""


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


KEYS: dict[str, Key] = {k.name: k for k in [
    Key("n", _int, 10, "stations", "number of saturated stations", lambda v: v >= 1, ">= 1"),
    Key("sinr_db", float, math.inf, "dB", "signal to noise-plus-interference ratio",
        lambda v: not math.isnan(v), "a number or inf"),
    Key("capture_db", float, math.inf, "dB", "capture ratio z0 (inf disables capture)",
        lambda v: not math.isnan(v), "a number or inf"),
    Key("spreading_factor", _int, 11, "chips", "DSSS spreading factor Sf", lambda v: v >= 1, ">= 1"),
    Key("path_loss_exponent", float, 4.0, "-", "path loss exponent x (geometry only)", _pos, "> 0"),
    Key("mean_power", float, 1.0, "linear", "local mean received power p0", _pos, "> 0"),
    Key("payload_bytes", _int, 1024, "bytes", "payload size", _nonneg, ">= 0"),
    Key("mac_header_bytes", _int, 24, "bytes", "MAC header size", _pos, "> 0"),
    Key("phy_header_bytes", _int, 16, "bytes", "PHY header size (sent at basic rate)", _pos, "> 0"),
    Key("ack_bytes", _int, 14, "bytes", "ACK frame size", _pos, "> 0"),
    Key("nak_bytes", _int, 14, "bytes", "NAK frame size (must equal ack_bytes)", _pos, "> 0"),
    Key("basic_rate_mbps", _rate, 1.0, "Mbit/s", "basic rate: 1, 2, 5.5 or 11"),
    Key("data_rate_mbps", _rate, 11.0, "Mbit/s", "data rate: 1, 2, 5.5 or 11"),
    Key("slot_us", float, 20.0, "us", "empty slot time sigma", _pos, "> 0"),
    Key("sifs_us", float, 10.0, "us", "SIFS", _pos, "> 0"),
    Key("difs_us", float, 50.0, "us", "DIFS", _pos, "> 0"),
    Key("ack_timeout_us", float, 300.0, "us", "ACK timeout", _pos, "> 0"),
    Key("prop_delay_us", float, 1.0, "us", "propagation delay", _pos, "> 0"),
    Key("w0", _int, 32, "slots", "minimum contention window", lambda v: v >= 2, ">= 2"),
    Key("m", _int, 5, "stages", "maximum backoff stage", _nonneg, ">= 0"),
    Key("ser_formula", _choice(SER_FORMULAS), "corrected", "-", "11 Mbps SER spectrum"),
    Key("capture_semantics", _choice(CAPTURE_SEMANTICS), "conditional", "-",
        "capture probability fed to the chain"),
    Key("capture_then_error", _bool, False, "bool", "captured frames also suffer channel errors"),
    Key("strict_timing", _choice(TIMING_MODES), "verbatim", "-", "'extended' adds SIFS+DIFS to T_e"),
    Key("slots", _int, 1_000_000, "slots", "simulated backoff slots per run", lambda v: v >= 1, ">= 1"),
    Key("seed", _int, 1, "u64", "base random seed", lambda v: 0 <= v < 2 ** 64, "in [0, 2^64)"),
    Key("replications", _int, 1, "runs", "independent simulation runs", lambda v: v >= 1, ">= 1"),
    Key("capture_mode", _choice(CAPTURE_MODES), "analytic", "-", "simulator capture sampling"),
    Key("workers", _int, 1, "processes", "parallel workers for sweeps", lambda v: v >= 1, ">= 1"),
    Key("sweep_axis", _choice(SWEEP_AXES), "sinr_db", "-", "swept parameter"),
    Key("sweep_start", float, 0.0, "axis unit", "first sweep value"),
    Key("sweep_stop", float, 30.0, "axis unit", "last sweep value (inclusive)"),
    Key("sweep_step", float, 1.0, "axis unit", "sweep increment", _pos, "> 0"),
]}


def keys_help() -> str:
    lines = ["configuration keys (key = value; units in brackets):"]
    for k in KEYS.values():
        default = "inf" if k.default == math.inf else k.default
        lines.append(f"  {k.name:<20} [{k.unit}] {k.help} (default {default})")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    values: dict
    mac: MacParams
    channel: ChannelParams
    n: int
    slots: int
    seed: int
    replications: int
    capture_mode: str
    workers: int
    sweep_axis: str
    sweep_start: float
    sweep_stop: float
    sweep_step: float


def _parse_value(key: str, text: str, line: Optional[int], source: str):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}", line, source)
    spec = KEYS[key]
    try:
        value = spec.parse(text.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}", line, source) from None
    if spec.check is not None and not spec.check(value):
        raise ConfigError(f"{key} = {text.strip()} out of range (must be {spec.rule})", line, source)
    return value


def _pairs(text: str) -> Iterable[tuple[int, str, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed line {raw.strip()!r} (expected key = value)", lineno)
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"malformed line {raw.strip()!r}", lineno)
        yield lineno, key, value


def parse_config(text: str = "", overrides: Iterable[str] = (), mode: str = "solve") -> RunConfig:
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    values = {k.name: k.default for k in KEYS.values()}
    for lineno, key, value in _pairs(text):
        values[key] = _parse_value(key, value, lineno, "config")
    for i, item in enumerate(overrides, start=1):
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}", i, "--set")
        key, value = item.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), value, i, "--set")
    return build(mode, values)


def build(mode: str, values: dict) -> RunConfig:
    mac_fields = {f.name for f in fields(MacParams)}
    try:
        mac = MacParams(**{k: v for k, v in values.items() if k in mac_fields})
        capture = CaptureParams(z0=db_to_linear(values["capture_db"]),
                                spreading_factor=values["spreading_factor"],
                                path_loss_exponent=values["path_loss_exponent"],
                                mean_power=values["mean_power"])
        channel = ChannelParams(sinr=db_to_linear(values["sinr_db"]), capture=capture,
                                ser_formula=values["ser_formula"],
                                capture_semantics=values["capture_semantics"],
                                capture_then_error=values["capture_then_error"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if values["sweep_stop"] < values["sweep_start"]:
        raise ConfigError("sweep_stop must be >= sweep_start")
    return RunConfig(
        mode=mode, values=dict(values), mac=mac, channel=channel, n=values["n"],
        slots=values["slots"], seed=values["seed"], replications=values["replications"],
        capture_mode=values["capture_mode"], workers=values["workers"],
        sweep_axis=values["sweep_axis"], sweep_start=values["sweep_start"],
        sweep_stop=values["sweep_stop"], sweep_step=values["sweep_step"],
    )


def with_values(config: RunConfig, **changes) -> RunConfig:
    """Copy of ``config`` with some raw (unconverted) key values replaced."""
    values = dict(config.values)
    for key, value in changes.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = value
    return build(config.mode, values)
