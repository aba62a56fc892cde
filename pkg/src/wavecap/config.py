"""Run configuration: a flat INI-style key-value format.

Sections and keys (defaults in parentheses; values are scalars):

    [run]         format_version (1), label ("run")
    [grid]        n_points, length, origin (0.0)
    [packet]      center, width, momentum
    [detector]    center, half_width, strength (0.0)
    [scenario]    kind, pulse_gap (0.0), t_final, dt, sample_every (1)
    [calibration] enabled (false), target (0.999), tolerance (5e-4),
                  max_iter (40)
    [rule.<kind>] one section per reduction rule to run; keys are the
                  rule's parameters (tau_env, onset_epsilon)
    [trials]      n_trials (1000), base_seed (0)
    [output]      directory (unset), snapshot_stride (0), plots (false)

Parsing validates everything before any computation: unknown sections or
keys, malformed scalars, and invariant violations are all reported at once
with their field paths, and no partial config is ever returned.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigError, NumericsError, ValidationError, WavecapError
from .propagate import DetectorSpec, _Stepper
from .reduction import PENROSE_ENV, ReductionRule
from .scenario import KINDS, ScenarioSpec, build_initial_state
from .state import Grid1D, PacketSpec, build_grid

FORMAT_VERSION = 1


@dataclass(frozen=True)
class CalibrationConfig:
    enabled: bool = False
    target: float = 0.999
    tolerance: float = 5e-4
    max_iter: int = 40


@dataclass(frozen=True)
class TrialsConfig:
    n_trials: int = 1000
    base_seed: int = 0


@dataclass(frozen=True)
class OutputConfig:
    directory: Optional[str] = None
    snapshot_stride: int = 0
    plots: bool = False


@dataclass(frozen=True)
class RunConfig:
    format_version: int
    label: str
    grid: Grid1D
    scenario: ScenarioSpec
    calibration: CalibrationConfig
    rules: tuple[ReductionRule, ...]
    trials: TrialsConfig
    output: OutputConfig


_KNOWN_KEYS = {
    "run": {"format_version", "label"},
    "grid": {"n_points", "length", "origin"},
    "packet": {"center", "width", "momentum"},
    "detector": {"center", "half_width", "strength"},
    "scenario": {"kind", "pulse_gap", "t_final", "dt", "sample_every"},
    "calibration": {"enabled", "target", "tolerance", "max_iter"},
    "trials": {"n_trials", "base_seed"},
    "output": {"directory", "snapshot_stride", "plots"},
}
_RULE_KEYS = {"tau_env", "onset_epsilon"}


class _Extractor:
    """Pulls typed values out of parsed sections, collecting errors."""

    def __init__(self, parser: configparser.ConfigParser, errors: list[str]):
        self.parser = parser
        self.errors = errors

    def _raw(self, section: str, key: str):
        if self.parser.has_section(section) and self.parser.has_option(section, key):
            return self.parser.get(section, key)
        return None

    def get(self, section, key, kind, default=None, required=False):
        raw = self._raw(section, key)
        if raw is None:
            if required:
                self.errors.append(f"{section}.{key}: required key is missing")
            return default
        raw = raw.strip()
        try:
            if kind is bool:
                low = raw.lower()
                if low in ("true", "yes", "on", "1"):
                    return True
                if low in ("false", "no", "off", "0"):
                    return False
                raise ValueError(raw)
            if kind is int:
                return int(raw)
            if kind is float:
                return float(raw)
            return raw
        except ValueError:
            self.errors.append(
                f"{section}.{key}: cannot parse {raw!r} as {kind.__name__}")
            return default


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate configuration text.

    Raises ConfigError carrying every violation found, each prefixed with
    its field path.
    """
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       inline_comment_prefixes=("#", ";"),
                                       strict=True)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"config: syntax error: {exc}"]) from exc

    errors: list[str] = []
    rule_sections: list[str] = []
    for section in parser.sections():
        if section.startswith("rule."):
            rule_sections.append(section)
            for key in parser.options(section):
                if key not in _RULE_KEYS:
                    errors.append(f"{section}.{key}: unknown key")
            continue
        if section not in _KNOWN_KEYS:
            errors.append(f"{section}: unknown section")
            continue
        for key in parser.options(section):
            if key not in _KNOWN_KEYS[section]:
                errors.append(f"{section}.{key}: unknown key")

    ex = _Extractor(parser, errors)
    format_version = ex.get("run", "format_version", int, default=FORMAT_VERSION)
    label = ex.get("run", "label", str, default="run")
    if format_version != FORMAT_VERSION:
        errors.append(f"run.format_version: unsupported version {format_version} "
                      f"(this build reads {FORMAT_VERSION})")

    n_points = ex.get("grid", "n_points", int, required=True)
    length = ex.get("grid", "length", float, required=True)
    origin = ex.get("grid", "origin", float, default=0.0)

    p_center = ex.get("packet", "center", float, required=True)
    p_width = ex.get("packet", "width", float, required=True)
    p_momentum = ex.get("packet", "momentum", float, required=True)

    d_center = ex.get("detector", "center", float, required=True)
    d_half_width = ex.get("detector", "half_width", float, required=True)
    d_strength = ex.get("detector", "strength", float, default=0.0)

    kind = ex.get("scenario", "kind", str, required=True)
    pulse_gap = ex.get("scenario", "pulse_gap", float, default=0.0)
    t_final = ex.get("scenario", "t_final", float, required=True)
    dt = ex.get("scenario", "dt", float, required=True)
    sample_every = ex.get("scenario", "sample_every", int, default=1)

    calibration = CalibrationConfig(
        enabled=ex.get("calibration", "enabled", bool, default=False),
        target=ex.get("calibration", "target", float, default=0.999),
        tolerance=ex.get("calibration", "tolerance", float, default=5e-4),
        max_iter=ex.get("calibration", "max_iter", int, default=40),
    )
    trials = TrialsConfig(
        n_trials=ex.get("trials", "n_trials", int, default=1000),
        base_seed=ex.get("trials", "base_seed", int, default=0),
    )
    output = OutputConfig(
        directory=ex.get("output", "directory", str, default=None),
        snapshot_stride=ex.get("output", "snapshot_stride", int, default=0),
        plots=ex.get("output", "plots", bool, default=False),
    )

    rules: list[ReductionRule] = []
    for section in rule_sections:
        rkind = section[len("rule."):]
        kwargs = {}
        tau_env = ex.get(section, "tau_env", float, default=None)
        if tau_env is not None:
            kwargs["tau_env"] = tau_env
        onset = ex.get(section, "onset_epsilon", float, default=None)
        if onset is not None:
            kwargs["onset_epsilon"] = onset
        try:
            rules.append(ReductionRule(kind=rkind, **kwargs))
        except ValidationError as exc:
            errors.append(f"{section}: {exc}")

    if errors:
        raise ConfigError(errors)

    # field-level invariants, then cross-field geometry via the builders
    if kind not in KINDS:
        errors.append(f"scenario.kind: must be one of {KINDS}, got {kind!r}")
    if dt is not None and dt <= 0.0:
        errors.append(f"scenario.dt: must be positive, got {dt}")
    if t_final is not None and t_final <= 0.0:
        errors.append(f"scenario.t_final: must be positive, got {t_final}")
    if sample_every < 1:
        errors.append(f"scenario.sample_every: must be >= 1, got {sample_every}")
    if trials.n_trials < 1:
        errors.append(f"trials.n_trials: must be >= 1, got {trials.n_trials}")
    if output.snapshot_stride < 0:
        errors.append(f"output.snapshot_stride: must be >= 0, got "
                      f"{output.snapshot_stride}")
    if calibration.enabled and not 0.0 < calibration.target < 1.0:
        errors.append(f"calibration.target: must be in (0, 1), got "
                      f"{calibration.target}")
    if errors:
        raise ConfigError(errors)

    try:
        grid = build_grid(n_points, length, origin)
    except ValidationError as exc:
        raise ConfigError([f"grid.n_points/length: {exc}"]) from exc

    packet = PacketSpec(center=p_center, width=p_width, momentum=p_momentum)
    detector = DetectorSpec(center=d_center, half_width=d_half_width,
                            strength=d_strength)
    spec = ScenarioSpec(kind=kind, packet=packet, detector=detector,
                        t_final=t_final, dt=dt, pulse_gap=pulse_gap,
                        sample_every=sample_every)

    try:
        build_initial_state(spec, grid)
    except WavecapError as exc:
        errors.append(f"scenario: {exc}")
    try:
        _Stepper(grid, detector, dt)
    except (ValidationError, NumericsError) as exc:
        errors.append(f"scenario.dt: {exc}")
    if errors:
        raise ConfigError(errors)

    return RunConfig(format_version=format_version, label=label, grid=grid,
                     scenario=spec, calibration=calibration,
                     rules=tuple(rules), trials=trials, output=output)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: RunConfig) -> str:
    """Render a RunConfig back to config text; parse_config round-trips it."""
    spec = config.scenario
    out = io.StringIO()

    def section(name, pairs):
        out.write(f"[{name}]\n")
        for key, value in pairs:
            if value is None:
                continue
            out.write(f"{key} = {_fmt(value)}\n")
        out.write("\n")

    section("run", [("format_version", config.format_version),
                    ("label", config.label)])
    section("grid", [("n_points", config.grid.n_points),
                     ("length", config.grid.length),
                     ("origin", config.grid.origin)])
    section("packet", [("center", spec.packet.center),
                       ("width", spec.packet.width),
                       ("momentum", spec.packet.momentum)])
    section("detector", [("center", spec.detector.center),
                         ("half_width", spec.detector.half_width),
                         ("strength", spec.detector.strength)])
    section("scenario", [("kind", spec.kind),
                         ("pulse_gap", spec.pulse_gap),
                         ("t_final", spec.t_final),
                         ("dt", spec.dt),
                         ("sample_every", spec.sample_every)])
    section("calibration", [("enabled", config.calibration.enabled),
                            ("target", config.calibration.target),
                            ("tolerance", config.calibration.tolerance),
                            ("max_iter", config.calibration.max_iter)])
    for rule in config.rules:
        pairs = []
        if rule.kind == PENROSE_ENV:
            pairs.append(("tau_env", rule.tau_env))
        pairs.append(("onset_epsilon", rule.onset_epsilon))
        section(f"rule.{rule.kind}", pairs)
    section("trials", [("n_trials", config.trials.n_trials),
                       ("base_seed", config.trials.base_seed)])
    section("output", [("directory", config.output.directory),
                       ("snapshot_stride", config.output.snapshot_stride),
                       ("plots", config.output.plots)])
    return out.getvalue()


def with_overrides(config: RunConfig, *, base_seed: Optional[int] = None,
                   directory: Optional[str] = None) -> RunConfig:
    """CLI-level overrides that do not alter the physics."""
    trials = config.trials if base_seed is None else \
        replace(config.trials, base_seed=base_seed)
    output = config.output if directory is None else \
        replace(config.output, directory=directory)
    return replace(config, trials=trials, output=output)
