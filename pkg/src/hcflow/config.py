"""Scenario files: TOML description of one flow experiment.

A scenario fixes the space (curvature a, dimension n), the initial surface,
the speed and constraint, and the integrator controls.  Loading is strict:
unknown keys are errors (reported with their dotted path), required fields
must be present, and the initial data must be strictly h-convex and inside
the speed's domain, so misconfigurations fail at load time rather than at
step 80_000.

    [space]                 [initial]                  [flow]
    a = 1.0                 kind = "perturbed"         speed = "H^2"
    n = 1                   R = 1.2                    constraint = "volume"
                            mode = 2                   t_end = 50.0
    [output]                amplitude = 0.1
    snapshots = false       N = 512
    plots = true
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:          # Python 3.10
    import tomli as tomllib

import numpy as np

from .flow import CONSTRAINTS, FlowConfig
from .hypmath import SpaceParams
from .speed import SpeedDomainError, SpeedParseError, parse_speed
from .surface import (RadialGraph, geometry, hconvexity_margin,
                      offset_sphere_graph, perturbed_graph, sphere_graph,
                      uniform_grid)


class ConfigError(Exception):
    """A scenario file is malformed; the message names the offending key."""


INITIAL_KINDS = ("sphere", "perturbed", "offset_sphere", "explicit")


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    N: int
    R: float | None = None
    mode: int | None = None
    amplitude: float | None = None
    offset: float | None = None
    u: tuple | None = None


@dataclass(frozen=True)
class Scenario:
    """Fully resolved experiment description."""

    name: str
    space: SpaceParams
    initial: InitialSpec
    speed_source: str
    constraint: str
    cfl: float
    t_end: float
    dt: float | None
    projection: bool
    stop_eps: float
    record_every: int
    snapshots: bool
    plots: bool
    out_dir: str | None = None

    def build_graph(self) -> RadialGraph:
        ini = self.initial
        if ini.kind == "sphere":
            return sphere_graph(self.space, ini.N, ini.R)
        if ini.kind == "perturbed":
            return perturbed_graph(self.space, ini.N, ini.R, ini.mode, ini.amplitude)
        if ini.kind == "offset_sphere":
            return offset_sphere_graph(self.space, ini.N, ini.R, ini.offset)
        return RadialGraph(self.space, uniform_grid(self.space, ini.N),
                           np.asarray(ini.u, dtype=float))

    def build_flow_config(self) -> FlowConfig:
        return FlowConfig(speed=parse_speed(self.speed_source),
                          constraint=self.constraint, cfl=self.cfl,
                          t_end=self.t_end, dt=self.dt,
                          projection=self.projection, stop_eps=self.stop_eps,
                          record_every=self.record_every,
                          keep_snapshots=self.snapshots)

    def effective(self) -> dict:
        """All resolved settings, defaults included, for the run manifest."""
        ini = {k: v for k, v in vars(self.initial).items() if v is not None}
        if "u" in ini:
            ini["u"] = list(ini["u"])
        return {
            "name": self.name,
            "space": {"a": self.space.a, "n": self.space.n},
            "initial": ini,
            "flow": {
                "speed": self.speed_source,
                "constraint": self.constraint,
                "cfl": self.cfl,
                "t_end": self.t_end,
                "dt": self.dt,
                "projection": self.projection,
                "stop_eps": self.stop_eps,
                "record_every": self.record_every,
            },
            "output": {"snapshots": self.snapshots, "plots": self.plots,
                       "dir": self.out_dir},
        }


def _typename(x):
    return {bool: "boolean", int: "integer", float: "number", str: "string",
            list: "array", dict: "table"}.get(type(x), type(x).__name__)


class _Table:
    """One TOML table with strict key accounting."""

    def __init__(self, data: dict, path: str):
        self.data = data
        self.path = path
        self.seen = set()

    def _label(self, key):
        return f"{self.path}.{key}" if self.path else key

    def get(self, key, kind, default=None, required=False):
        self.seen.add(key)
        if key not in self.data:
            if required:
                raise ConfigError(f"missing required key '{self._label(key)}'")
            return default
        val = self.data[key]
        if kind is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if kind is int and isinstance(val, bool):
            raise ConfigError(f"'{self._label(key)}' must be an integer")
        if not isinstance(val, kind):
            want = {bool: "boolean", int: "integer", float: "number",
                    str: "string", list: "array"}[kind]
            raise ConfigError(f"'{self._label(key)}' must be a {want}, "
                              f"got {_typename(val)}")
        return val

    def finish(self):
        extra = sorted(set(self.data) - self.seen)
        if extra:
            raise ConfigError(f"unknown key '{self._label(extra[0])}'")


def _subtable(tbl: _Table, key: str, required=False) -> _Table:
    tbl.seen.add(key)
    data = tbl.data.get(key)
    if data is None:
        if required:
            raise ConfigError(f"missing required table [{key}]")
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"'{key}' must be a table")
    return _Table(data, key)


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file."""
    return load_scenario_with_override(path)


load_config = load_scenario


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    top = _Table(raw, "")

    sc = _subtable(top, "scenario")
    name = sc.get("name", str, default=name)
    sc.finish()

    sp = _subtable(top, "space", required=True)
    a = sp.get("a", float, default=1.0)
    n = sp.get("n", int, required=True)
    sp.finish()
    try:
        space = SpaceParams(a=a, n=n)
    except ValueError as e:
        raise ConfigError(f"[space]: {e}") from e

    ini = _subtable(top, "initial", required=True)
    kind = ini.get("kind", str, required=True)
    if kind not in INITIAL_KINDS:
        raise ConfigError(f"'initial.kind' must be one of {INITIAL_KINDS}")
    default_N = 512 if space.n == 1 else 256
    if kind == "explicit":
        u = ini.get("u", list, required=True)
        if ini.get("N", int) not in (None, len(u)):
            raise ConfigError("'initial.N' disagrees with the length of 'initial.u'")
        if not u or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                            for x in u):
            raise ConfigError("'initial.u' must be a non-empty array of numbers")
        spec = InitialSpec(kind=kind, N=len(u), u=tuple(float(x) for x in u))
    else:
        N = ini.get("N", int, default=default_N)
        R = ini.get("R", float, required=True)
        if kind == "perturbed":
            spec = InitialSpec(kind=kind, N=N, R=R,
                               mode=ini.get("mode", int, required=True),
                               amplitude=ini.get("amplitude", float, required=True))
        elif kind == "offset_sphere":
            spec = InitialSpec(kind=kind, N=N, R=R,
                               offset=ini.get("offset", float, required=True))
        else:
            spec = InitialSpec(kind=kind, N=N, R=R)
    ini.finish()

    out = _subtable(top, "output")
    snapshots = out.get("snapshots", bool, default=False)
    plots = out.get("plots", bool, default=True)
    out_dir = out.get("dir", str)
    out.finish()

    fl = _subtable(top, "flow", required=True)
    scenario = Scenario(
        name=name,
        space=space,
        initial=spec,
        speed_source=fl.get("speed", str, required=True),
        constraint=fl.get("constraint", str, default="volume"),
        cfl=fl.get("cfl", float, default=0.4),
        t_end=fl.get("t_end", float, default=50.0),
        dt=fl.get("dt", float),
        projection=fl.get("projection", bool, default=True),
        stop_eps=fl.get("stop_eps", float, default=1e-8),
        record_every=fl.get("record_every", int, default=20),
        snapshots=snapshots,
        plots=plots,
        out_dir=out_dir,
    )
    fl.finish()
    top.finish()

    _validate(scenario)
    return scenario


def parse_override_value(text: str):
    """Interpret a sweep value string as TOML would: integer, float, boolean,
    or (optionally quoted) string."""
    s = text.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1]
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def load_scenario_with_override(path, param: str = None, value=None,
                                name: str = None) -> Scenario:
    """Load a scenario file, optionally overriding one dotted key
    (e.g. param="flow.speed", value="H^2") before validation."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path} is not valid TOML: {e}") from e
    if param is not None:
        parts = param.split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"sweep parameter {param!r} must be a dotted "
                              "'table.key' path")
        table, key = parts
        node = raw.setdefault(table, {})
        if not isinstance(node, dict):
            raise ConfigError(f"'{table}' is not a table")
        node[key] = value
    return scenario_from_dict(raw, name=name or path.stem)


def _validate(s: Scenario):
    if s.constraint not in CONSTRAINTS:
        raise ConfigError(f"'flow.constraint' must be one of {CONSTRAINTS}")
    try:
        speed = parse_speed(s.speed_source)
    except SpeedParseError as e:
        raise ConfigError(f"'flow.speed': {e}") from e
    try:
        s.build_flow_config()
    except ValueError as e:
        raise ConfigError(f"[flow]: {e}") from e
    try:
        g = s.build_graph()
    except ValueError as e:
        raise ConfigError(f"[initial]: {e}") from e
    frame = geometry(g)
    margin = hconvexity_margin(frame, s.space.a)
    if margin <= 0.0:
        raise ConfigError("initial surface is not strictly h-convex "
                          f"(margin {margin:.6g}); the flow theory needs "
                          "all principal curvatures above a")
    try:
        speed.eval(frame.H)
    except SpeedDomainError as e:
        raise ConfigError(f"initial curvatures leave the speed's domain: {e}") from e
