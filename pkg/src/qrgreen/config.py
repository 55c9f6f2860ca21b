"""Render configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

from .core_maps import MapParams
from .escape import GridSpec

MAX_PIXELS = 10 ** 8


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line or field."""


class Mode(enum.Enum):
    DYNAMICAL = "dynamical"
    MANDELBROT = "mandelbrot"
    GREENS_FIELD = "greens_field"
    EQUIPOTENTIAL = "equipotential"
    FIXED_POINTS = "fixed_points"
    BOUNDARY_PROFILE = "boundary_profile"
    MANIFOLDS = "manifolds"


class Palette(enum.Enum):
    GRAY_LOG = "gray_log"
    ITER_BANDS = "iter_bands"


class LevelUnits(enum.Enum):
    ABSOLUTE = "absolute"
    CRITICAL = "t0"     # levels are multiples of t0 = G(0)


def _parse_enum(cls, text):
    key = text.strip().lower().replace("-", "_")
    for member in cls:
        if key in (member.value, member.name.lower(), member.name.lower().replace("_", "")):
            return member
    raise ValueError(f"expected one of {[m.value for m in cls]}")


def _parse_levels(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _opt_str(text):
    text = text.strip()
    return text or None


@dataclass(frozen=True)
class RenderConfig:
    mode: Mode = Mode.DYNAMICAL
    K: float = 2.0
    theta: float = 0.0
    c_re: float = 0.0
    c_im: float = 0.0
    xmin: float = -2.0
    xmax: float = 2.0
    ymin: float = -1.5
    ymax: float = 1.5
    width: int = 800
    height: int = 600
    budget: int = 1000
    levels: tuple = ()
    level_units: LevelUnits = LevelUnits.CRITICAL
    palette: Palette = Palette.GRAY_LOG
    out: str = "out.ppm"
    image: str | None = None
    plot: str | None = None
    depth_ratio: float = 1e-3
    profile_angles: int = 4096
    tol: float = 1e-10
    period: int = 1
    seeds: int = 24
    arc_budget: int = 2000
    mark: bool = False

    @property
    def params(self) -> MapParams:
        return MapParams(self.K, self.theta, complex(self.c_re, self.c_im))

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.xmin, self.xmax, self.ymin, self.ymax, self.width, self.height)

    def validate(self) -> "RenderConfig":
        try:
            self.spec
            if self.mode is not Mode.MANDELBROT:
                self.params
            elif not (self.K > 0 and math.isfinite(self.K)):
                raise ValueError("K must be positive and finite")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.width * self.height > MAX_PIXELS:
            raise ConfigError(f"width*height = {self.width * self.height} exceeds {MAX_PIXELS}")
        for name in ("budget", "profile_angles", "seeds", "arc_budget"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if not 0 < self.depth_ratio < 1:
            raise ConfigError("depth_ratio must lie in (0, 1)")
        if self.mode is Mode.EQUIPOTENTIAL and not self.levels:
            raise ConfigError("equipotential mode needs levels")
        if any(not (t > 0 and math.isfinite(t)) for t in self.levels):
            raise ConfigError("levels must be positive")
        if self.mode is Mode.FIXED_POINTS and not 1 <= self.period <= 6:
            raise ConfigError("period must be between 1 and 6")
        return self


_PARSERS = {
    "mode": lambda s: _parse_enum(Mode, s),
    "palette": lambda s: _parse_enum(Palette, s),
    "level_units": lambda s: _parse_enum(LevelUnits, s),
    "levels": _parse_levels,
    "image": _opt_str,
    "plot": _opt_str,
    "out": str.strip,
    "mark": _parse_bool,
}
_FIELD_TYPES = {f.name: f.type for f in fields(RenderConfig)}


def _parse_value(key, text):
    if key in _PARSERS:
        return _PARSERS[key](text)
    kind = _FIELD_TYPES[key]
    if kind == "int":
        return int(text)
    return float(text)


_KEYS = {name.lower(): name for name in _FIELD_TYPES}


def _normalise_key(key: str) -> str:
    name = key.strip().replace("-", "_")
    return _KEYS.get(name.lower(), name)


def apply(config: RenderConfig, pairs, source: str = "override") -> RenderConfig:
    """Apply ``(key, text, where)`` triples to ``config``."""
    updates = {}
    for key, text, where in pairs:
        name = _normalise_key(key)
        if name not in _FIELD_TYPES:
            raise ConfigError(f"{source}{where}: unknown key {key!r}")
        try:
            updates[name] = _parse_value(name, text)
        except ValueError as exc:
            raise ConfigError(f"{source}{where}: bad value for {name}: {text!r} ({exc})") from None
    return replace(config, **updates)


def parse_config(text: str, source: str = "<config>", base: RenderConfig | None = None) -> RenderConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        pairs.append((key, value, f":{lineno}"))
    return apply(base or RenderConfig(), pairs, source)


def load_config(path) -> RenderConfig:
    with open(path) as fh:
        return parse_config(fh.read(), str(path))


def dump_config(config: RenderConfig) -> str:
    """Canonical text form; ``parse_config(dump_config(c)) == c``."""
    lines = []
    for f in fields(RenderConfig):
        v = getattr(config, f.name)
        if isinstance(v, enum.Enum):
            text = v.value
        elif f.name == "levels":
            text = ",".join(repr(float(t)) for t in v)
        elif v is None:
            text = ""
        elif isinstance(v, bool):
            text = "true" if v else "false"
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
