"""Experiment configuration files.

A config is a commented INI file::

    # the canonical bus at the six snapshot times
    [state]
    kind = reference-quantum-bus

    [times]
    values = 0 0.05 0.0875 0.125 0.25 0.375

Sections and keys are fixed by ``SCHEMA``; anything else is an error that
reports the offending line and column.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import PositionGridSpec
from .errors import ConfigError, InvalidArgumentError
from .scales import PhysicalScales
from .states import ClassicalGridSpec, GaussianComponent, MomentumGridSpec

STATE_KINDS = ("reference-quantum-bus", "reference-classical-bus", "optimal-eigenfunction", "gaussian-mixture",
               "classical")
FORMATS = ("csv", "json")


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _positive(text):
    value = _float(text)
    if value <= 0:
        raise ValueError("must be positive")
    return value


def _nonnegative(text):
    value = _float(text)
    if value < 0:
        raise ValueError("must be nonnegative")
    return value


def _count(text):
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _floats(text):
    return tuple(_float(v) for v in text.replace(",", " ").split())


def _positives(text):
    return tuple(_positive(v) for v in text.replace(",", " ").split())


def _bool(text):
    value = text.strip().lower()
    if value in ("yes", "true", "on", "1"):
        return True
    if value in ("no", "false", "off", "0"):
        return False
    raise ValueError("must be yes or no")


def _choice(*options):
    def parse(text):
        value = text.strip()
        if value not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return value
    return parse


def _schedule(text):
    pairs = []
    for item in text.replace(",", " ").split():
        n, sep, k = item.partition(":")
        if not sep:
            raise ValueError("schedule entries look like N:k_max")
        pairs.append((_count(n), _positive(k)))
    if not pairs:
        raise ValueError("schedule is empty")
    return tuple(pairs)


def _components(text):
    comps = []
    for line in text.strip().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [_float(v) for v in line.split()]
        if len(parts) not in (4, 5):
            raise ValueError("each component is: weight_re weight_im center_k width_k [phase_x0]")
        re_, im, k0, width = parts[:4]
        comps.append(GaussianComponent(complex(re_, im), k0, width, parts[4] if len(parts) == 5 else 0.0))
    return tuple(comps)


# section -> key -> parser; values absent from the file keep the dataclass defaults
SCHEMA = {
    "scales": {"mass": _positive, "planck_hbar": _positive, "length_unit": _positive, "time_unit": _positive},
    "state": {"kind": _choice(*STATE_KINDS), "components": _components, "n": _count, "k_max": _positive,
              "duration": _positive, "position_peaks": _floats, "position_width": _positive,
              "velocity_center": _float, "velocity_width": _positive},
    "momentum_grid": {"k_max": _positive, "n_points": _count, "order": _count},
    "position_grid": {"x_min": _float, "x_max": _float, "panel_width": _positive, "order": _count},
    "phase_space": {"x_min": _float, "x_max": _float, "v_max": _positive, "nx": _count, "nv": _count,
                    "order": _count, "t_pad": _nonnegative, "stride": _count, "export_surface": _bool},
    "wigner": {"x_panel": _positive, "k_panel": _positive, "q_panel": _positive, "wedge_durations": _positives,
               "method": _choice("auto", "global", "per-k")},
    "times": {"values": _floats, "start": _nonnegative, "stop": _nonnegative, "count": _count},
    "bound": {"schedule": _schedule, "tolerance": _positive, "target": _float, "tail_check": _bool},
    "scalecheck": {"factors": _floats, "t1": _nonnegative, "t2": _positive, "tolerance": _positive},
    "output": {"directory": str, "format": _choice(*FORMATS)},
}


@dataclass(frozen=True)
class StateConfig:
    kind: str = "reference-quantum-bus"
    components: tuple = ()
    n: int = 1000
    k_max: float = 20.0
    duration: float = 1.0
    position_peaks: tuple = (-2.0, 2.0)
    position_width: float = 0.6
    velocity_center: float = 20.0
    velocity_width: float = 4.0

    @property
    def is_classical(self) -> bool:
        return self.kind in ("reference-classical-bus", "classical")


@dataclass(frozen=True)
class PhaseSpaceConfig:
    grid: ClassicalGridSpec = field(default_factory=ClassicalGridSpec)
    stride: int = 4
    export_surface: bool = True


@dataclass(frozen=True)
class WignerConfig:
    x_panel: float | None = None
    k_panel: float | None = None
    q_panel: float | None = None
    wedge_durations: tuple = (0.002,)
    method: str = "auto"


@dataclass(frozen=True)
class BoundConfig:
    schedule: tuple = ((1000, 40.0), (2000, 40.0), (4000, 40.0))
    tolerance: float = 1e-3
    target: float = 0.0384517
    tail_check: bool = True


@dataclass(frozen=True)
class ScaleCheckConfig:
    factors: tuple = (1.0, 1.0 / math.sqrt(2.0), 0.5)
    t1: float = 0.0
    t2: float = 0.002
    tolerance: float = 1e-5


@dataclass(frozen=True)
class ExperimentConfig:
    scales: PhysicalScales = field(default_factory=PhysicalScales)
    state: StateConfig = field(default_factory=StateConfig)
    momentum_grid: MomentumGridSpec | None = None  # None: the state's own default
    position_grid: PositionGridSpec | None = None
    phase_space: PhaseSpaceConfig = field(default_factory=PhaseSpaceConfig)
    wigner: WignerConfig = field(default_factory=WignerConfig)
    times: tuple = (0.0, 0.05, 0.0875, 0.125, 0.25, 0.375)
    bound: BoundConfig = field(default_factory=BoundConfig)
    scalecheck: ScaleCheckConfig = field(default_factory=ScaleCheckConfig)
    output_directory: str = "out"
    output_format: str = "csv"
    source: str = ""


_SECTION_RE = re.compile(r"^\s*\[([^\]]*)\]")
_KEY_RE = re.compile(r"^(\s*)([^=:\s][^=:]*?)\s*[=:]\s*")


def _locate(text: str):
    """(section, key) -> (line, column of the value); sections -> line."""
    keys, sections = {}, {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            sections.setdefault(section, (lineno, line.index("[") + 2))
            continue
        if line[:1].isspace() and section is not None:
            continue  # continuation of a multi-line value
        m = _KEY_RE.match(line)
        if m and section is not None:
            keys.setdefault((section, m.group(2).strip().lower()), (lineno, m.end() + 1, len(m.group(1)) + 1))
    return keys, sections


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       comment_prefixes=("#", ";"), default_section="\0none")
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: key outside any section", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}: duplicate section [{exc.section}]", exc.lineno or 0, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}: duplicate key {exc.option!r} in [{exc.section}]", exc.lineno or 0, 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else 0
        raise ConfigError(f"{source}: cannot parse line", lineno, 1) from None

    keys, sections = _locate(text)
    values: dict[str, dict] = {}
    for section in parser.sections():
        line, col = sections.get(section, (0, 0))
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]", line, col)
        values[section] = {}
        for key, raw in parser.items(section):
            line, col, key_col = keys.get((section, key), (0, 0, 0))
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]", line, key_col)
            try:
                values[section][key] = SCHEMA[section][key](raw)
            except (ValueError, InvalidArgumentError) as exc:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {exc}", line, col) from None

    def where(section, key=None):
        if key is not None and (section, key) in keys:
            return keys[(section, key)][:2]
        return sections.get(section, (0, 0))

    try:
        return _build(values, source, where)
    except InvalidArgumentError as exc:
        raise ConfigError(f"{source}: {exc}", 0, 0) from None


def _build(values, source, where) -> ExperimentConfig:
    def sec(name):
        return values.get(name, {})

    def fail(msg, section, key=None):
        raise ConfigError(f"{source}: {msg}", *where(section, key))

    scales = PhysicalScales(**sec("scales"))
    state = StateConfig(**sec("state"))
    if state.kind == "gaussian-mixture" and not state.components:
        fail("gaussian-mixture needs a components list", "state", "kind")
    if state.kind != "gaussian-mixture" and state.components:
        fail("components are only used with kind = gaussian-mixture", "state", "components")
    if min(state.position_width, state.velocity_width) <= 0:
        fail("widths must be positive", "state")
    if state.kind == "optimal-eigenfunction" and state.n < 2:
        fail("eigenfunction needs n >= 2", "state", "n")

    momentum_grid = None
    if "momentum_grid" in values:
        momentum_grid = MomentumGridSpec(**sec("momentum_grid"))
        if momentum_grid.n_points < 2:
            fail("momentum grid needs at least 2 points", "momentum_grid", "n_points")

    position_grid = None
    if "position_grid" in values:
        pg = sec("position_grid")
        if "x_min" not in pg or "x_max" not in pg:
            fail("position_grid needs x_min and x_max", "position_grid")
        if pg["x_max"] <= pg["x_min"]:
            fail("x_max must exceed x_min", "position_grid", "x_max")
        position_grid = PositionGridSpec(**pg)

    ps = dict(sec("phase_space"))
    stride = ps.pop("stride", 4)
    export_surface = ps.pop("export_surface", True)
    grid = ClassicalGridSpec(**ps)
    if grid.x_max <= grid.x_min:
        fail("x_max must exceed x_min", "phase_space", "x_max")
    phase_space = PhaseSpaceConfig(grid, stride, export_surface)

    wigner = WignerConfig(**sec("wigner"))

    t = sec("times")
    if "values" in t and any(k in t for k in ("start", "stop", "count")):
        fail("give either values or start/stop/count", "times", "values")
    if "values" in t:
        times = t["values"]
    elif t:
        if not all(k in t for k in ("start", "stop", "count")):
            fail("start, stop and count go together", "times")
        if t["stop"] < t["start"]:
            fail("stop must not precede start", "times", "stop")
        times = tuple(float(v) for v in np.linspace(t["start"], t["stop"], t["count"]))
    else:
        times = ExperimentConfig.times
    if any(v < 0 for v in times):
        fail("times must be nonnegative", "times", "values")
    if any(b <= a for a, b in zip(times, times[1:])):
        fail("times must be strictly increasing", "times", "values")

    bound = BoundConfig(**sec("bound"))
    sc = ScaleCheckConfig(**sec("scalecheck"))
    if any(f <= 0 for f in sc.factors) or not sc.factors:
        fail("scale factors must be positive", "scalecheck", "factors")
    if sc.t2 <= sc.t1:
        fail("t2 must exceed t1", "scalecheck", "t2")

    out = sec("output")
    return ExperimentConfig(scales, state, momentum_grid, position_grid, phase_space, wigner, tuple(times), bound, sc,
                            out.get("directory", "out"), out.get("format", "csv"), source)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", 0, 0) from None
    return parse_config(text, str(path))
