"""Run configuration: flat ``key=value`` files, presets and overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .grid import ConfigurationError

PRESETS = ("example1", "example2", "example3", "custom")


@dataclass
class RunConfig:
    """Every knob of a run. ``None`` means "derive from other keys"."""

    preset: str = "custom"
    dim: int = 1
    x_l: float = 0.0
    x_r: float = 40.0
    y_l: float = 0.0
    y_r: float = 40.0
    dx: float = 0.1
    dy: float | None = None
    dt: float | None = None

    g: float = 0.0
    potential: str = "constant"
    v_value: float = 0.0
    v_amplitude: float = 1.0
    v_width: float = 1.0
    v_center: list = field(default_factory=lambda: [0.0, 0.0])

    initial: str = "gaussian"
    soliton_A: list = field(default_factory=list)
    soliton_B: list = field(default_factory=list)
    soliton_xc: list = field(default_factory=list)
    packet_amplitude: float = 1.0
    packet_rate: float = 1.0
    packet_center: list = field(default_factory=lambda: [20.0, 20.0])
    packet_k: list = field(default_factory=lambda: [0.0, 0.0])

    abc: str = "abc11"
    fixed: bool = False
    k0: float = 1.0
    fixed_sides: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    velocities: list = field(default_factory=list)
    fj_order: int = 3

    transform: str = "gabor"
    p: float = 4.0
    window_b: float | None = None
    window_beta: float | None = None
    k_max: float | None = None
    k_floor: float = 0.05
    refresh_every: int = 1

    t_final: float = 1.0
    output_dir: str = "slab_out"
    snapshot_every: float = 0.5
    snapshot_times: list = field(default_factory=list)
    metrics_every: int | None = None
    solver_tol: float = 1e-10
    solver_max_iter: int = 500

    exact: str = "none"
    enlargement: float = 2.0
    anchor: str = "center"
    probes: list = field(default_factory=list)

    def validate(self):
        """Raise :class:`ConfigurationError` naming the first bad key."""
        checks = [
            ("preset", self.preset in PRESETS),
            ("dim", self.dim in (1, 2)),
            ("x_r", self.x_r > self.x_l),
            ("y_r", self.dim == 1 or self.y_r > self.y_l),
            ("dx", self.dx > 0),
            ("dy", self.dy is None or self.dy > 0),
            ("dt", self.dt is None or self.dt > 0),
            ("potential", self.potential in ("constant", "gaussian")),
            ("initial", self.initial in ("zero", "solitons", "gaussian")),
            ("soliton_A", self.initial != "solitons"
             or len(self.soliton_A) == len(self.soliton_B) == len(self.soliton_xc) > 0),
            ("g", self.initial != "solitons" or self.g < 0),
            ("abc", self.abc in ("abc10", "abc11", "fj", "dirichlet")),
            ("alpha", len(self.alpha) in (0, 2)),
            ("velocities", len(self.velocities) <= 3),
            ("transform", self.transform in ("fourier", "gabor")),
            ("p", self.p > 0),
            ("window_b", self.window_b is None or self.window_b > 0),
            ("window_beta", self.window_beta is None or self.window_beta > 0),
            ("k_floor", self.k_floor >= 0),
            ("refresh_every", self.refresh_every >= 1),
            ("t_final", self.t_final >= 0),
            ("snapshot_every", self.snapshot_every > 0),
            ("metrics_every", self.metrics_every is None or self.metrics_every >= 1),
            ("solver_tol", 0 < self.solver_tol < 1),
            ("exact", self.exact in ("none", "solitons", "reference")),
            ("enlargement", self.enlargement > 1),
            ("anchor", self.anchor in ("center", "lower")),
        ]
        for key, ok in checks:
            if not ok:
                raise ConfigurationError(f"invalid value for {key}: {getattr(self, key)!r}")
        for item in self.fixed_sides:
            if ":" not in str(item):
                raise ConfigurationError(f"invalid value for fixed_sides: {item!r} (want side:k0)")
        return self

    def fixed_side_map(self):
        return {s.split(":")[0]: float(s.split(":")[1]) for s in self.fixed_sides}

    def resolve(self):
        """Copy with derived step sizes and cadences filled in.

        ``window_b`` and ``k_max`` stay ``None`` when unset: they mean a
        quarter of each axis length and the Nyquist number of each axis.
        """
        dy = self.dx if self.dy is None else self.dy
        dt = self.dt if self.dt is not None else self.dx**2
        every = self.metrics_every
        if every is None:
            every = 1 if self.dim == 1 else 10
        return dataclasses.replace(self, dy=dy, dt=dt, metrics_every=every)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def preset(name) -> RunConfig:
    """Base configuration for one of the shipped experiments."""
    if name == "example1":
        # two bright solitons (wave numbers 2 and 5) leaving through x = 40
        return RunConfig(
            preset=name, dim=1, x_l=0.0, x_r=40.0, dx=0.1, g=-2.0,
            initial="solitons", soliton_A=[1.0, 1.0], soliton_B=[2.0, 5.0],
            soliton_xc=[10.0, 30.0], fixed_sides=["left:0"], t_final=10.0,
            exact="solitons")
    if name == "example2":
        return RunConfig(
            preset=name, dim=1, x_l=0.0, x_r=30.0, dx=0.1, g=2.0,
            potential="gaussian", v_amplitude=1.0, v_width=1.0, v_center=[15.0, 0.0],
            initial="gaussian", packet_amplitude=1.0, packet_rate=0.1,
            packet_center=[15.0, 0.0], packet_k=[0.0, 0.0], t_final=6.0,
            exact="reference", enlargement=2.0, anchor="center")
    if name == "example3":
        return RunConfig(
            preset=name, dim=2, x_l=0.0, x_r=10.0, y_l=0.0, y_r=10.0, dx=0.05, g=-1.0,
            initial="gaussian", packet_amplitude=math.sqrt(2.0), packet_rate=1.0,
            packet_center=[5.0, 5.0], packet_k=[2.0, 2.0], t_final=2.0,
            exact="reference", enlargement=2.0, anchor="lower", probes=["10:10", "10:5"])
    if name == "custom":
        return RunConfig()
    raise ConfigurationError(f"invalid value for preset: {name!r}")


# -- text format -------------------------------------------------------------

def _field_kind(f):
    t = str(f.type)
    if t.startswith("list"):
        return "list"
    for kind in ("bool", "int", "float", "str"):
        if t.startswith(kind):
            return kind
    return "str"


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def parse_value(cfg_field, text):
    kind = _field_kind(cfg_field)
    text = str(text).strip()
    if text.lower() == "none" and "None" in str(cfg_field.type):
        return None
    try:
        if kind == "bool":
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "list":
            items = [s.strip() for s in text.split(",") if s.strip()]
            if cfg_field.name in ("fixed_sides", "probes"):
                return items
            return [float(s) for s in items]
    except ValueError:
        raise ConfigurationError(f"invalid value for {cfg_field.name}: {text!r}") from None
    return text


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Return a copy with string or typed ``overrides`` applied."""
    changes = {}
    for key, value in overrides.items():
        key = key.replace("-", "_")
        if key not in FIELDS:
            raise ConfigurationError(f"unknown configuration key: {key}")
        changes[key] = parse_value(FIELDS[key], value) if isinstance(value, str) else value
    return dataclasses.replace(cfg, **changes)


def read_config_text(text) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path, overrides=None) -> RunConfig:
    """Read a ``key=value`` file; ``preset`` (if present) supplies the defaults."""
    values = read_config_text(Path(path).read_text())
    base = preset(values.get("preset", "custom"))
    cfg = apply_overrides(base, values)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg.validate()


def dump_config(cfg: RunConfig) -> str:
    """Fully resolved ``key=value`` text; :func:`load_config` reads it back."""
    lines = [f"{name}={_format_value(getattr(cfg, name))}" for name in FIELDS]
    return "\n".join(lines) + "\n"
