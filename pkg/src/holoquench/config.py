"""Strict line-oriented run configs.

Format: one ``key = value`` pair per line, ``#`` starts a comment line,
blank lines ignored.  Unknown keys, duplicate keys and type mismatches are
errors that name the offending key and line.  Parsing materializes every
default, so the echoed config round-trips to an identical structure.
"""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import Callable

from .pipelines import GEOMETRIES, PROBE_REGION_PRESETS, TASKS, ExperimentConfig


class ConfigError(ValueError):
    """A config file could not be parsed into a valid run description."""


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part.strip()) for part in text.split(",") if part.strip())


def _parse_intervals(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        start_text, _, length_text = part.partition(":")
        if not length_text:
            raise ValueError(f"expected start:length, got {part!r}")
        out.append((int(start_text), int(length_text)))
    return tuple(out)


def _enum(name: str, allowed: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in allowed:
            raise ValueError(f"{name} must be one of {', '.join(allowed)}; got {text!r}")
        return text

    return parse


# key -> (parser, required).  Order fixes the echo format.
_SCHEMA: dict[str, tuple[Callable[[str], object], bool]] = {
    "geometry": (_enum("geometry", GEOMETRIES), True),
    "depth": (int, True),
    "throat_depth": (int, False),
    "interior": (_enum("interior", ("ring_bridge", "identify")), False),
    "mu": (float, True),
    "t": (float, False),
    "task": (_enum("task", TASKS), True),
    "alpha": (float, False),
    "alphas": (_parse_float_list, False),
    "region_size": (int, False),
    "mu_values": (_parse_float_list, False),
    "region": (_enum("region", PROBE_REGION_PRESETS), False),
    "intervals": (_parse_intervals, False),
    "side": (_enum("side", ("single", "left", "right")), False),
    "average_offsets": (_parse_bool, False),
    "exclude_margin": (int, False),
    "seed": (int, False),
    "output_dir": (str, False),
}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value_text = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        value_text = value_text.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        parser, _ = _SCHEMA[key]
        try:
            values[key] = parser(value_text)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    missing = [key for key, (_, required) in _SCHEMA.items() if required and key not in values]
    if missing:
        raise ConfigError(f"{source}: missing required keys: {', '.join(missing)}")
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: invalid configuration: {exc}") from exc


def parse_config(path: str | Path) -> ExperimentConfig:
    """Parse a config file into a fully defaulted ExperimentConfig."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ",".join(f"{start}:{length}" for start, length in value)
        return ",".join(_format_value(v) for v in value)
    return str(value)


def format_config(config: ExperimentConfig) -> str:
    """Echo a config in canonical key order; omits unset optional keys."""
    by_name = {f.name: getattr(config, f.name) for f in fields(config)}
    lines = []
    for key in _SCHEMA:
        value = by_name[key]
        if value is None:
            continue
        if key == "mu_values" and value == ():
            continue
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
