"""YAML run configurations for sweeps and shape optimisation.

Every file carries ``schema_version`` (currently 1) and ``kind``
(``sweep`` or ``optimize``).  A sweep file looks like::

    schema_version: 1
    kind: sweep
    name: single_disk
    n_nodes: 128
    wavelengths: {start: 300, stop: 1500, count: 241}   # nm
    material: {hbar_omega_p: 9.02, hbar_gamma: 0.027, eps_inf: 1.0}
    delta: 0.05          # period in micrometres (reflection table only)
    incidence_deg: 0
    threads: 1
    geometries:
      - name: r0.2
        components:
          - {kind: disk, center: [0, 0.5], radius: 0.2}

An optimize file replaces ``wavelengths``/``geometries`` with
``wavelength_nm``, ``steps``, ``geometry`` (one particle) or ``starts`` (a
list of particles), and optional ``random_starts: {count, seed, amplitude}``.
Validation failures raise :class:`ConfigError` naming the offending field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .geometry import GeometryError, make_disk, make_multi, make_star
from .impedance import WAVELENGTH_RANGE_NM, DrudeParameters

SCHEMA_VERSION = 1
SCENARIO_DIR = Path(__file__).with_name("scenarios")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted path of the bad entry."""

    def __init__(self, field_path, message):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


@dataclass(frozen=True)
class GeometrySpec:
    name: str
    components: tuple

    def build(self, n_default):
        parts = []
        for i, comp in enumerate(self.components):
            where = f"geometries[{self.name}].components[{i}]"
            n = int(comp.get("n_nodes", n_default))
            try:
                if comp["kind"] == "disk":
                    parts.append(make_disk(comp["center"], comp["radius"], n))
                else:
                    parts.append(make_star(comp["center"], comp["base_radius"], comp["amplitude"],
                                           comp["lobes"], n))
            except GeometryError as exc:
                raise ConfigError(where, str(exc)) from None
        try:
            return make_multi(parts)
        except GeometryError as exc:
            raise ConfigError(f"geometries[{self.name}]", str(exc)) from None


@dataclass(frozen=True)
class SweepConfig:
    name: str
    geometries: tuple
    n_nodes: int = 128
    wavelengths_nm: np.ndarray = field(default_factory=lambda: np.linspace(300.0, 1500.0, 241))
    drude: DrudeParameters = DrudeParameters()
    delta: float = 0.05
    incidence_deg: float = 0.0
    threads: int = 1
    svg: bool = True

    def incidence(self):
        a = math.radians(self.incidence_deg)
        return np.array([math.sin(a), -math.cos(a)])


@dataclass(frozen=True)
class OptimizeConfig:
    name: str
    starts: tuple
    wavelength_nm: float
    n_nodes: int = 128
    drude: DrudeParameters = DrudeParameters()
    steps: int = 20
    n_modes: int = 16
    initial_move: float = 0.02
    random_starts: dict | None = None
    threads: int = 1
    svg: bool = True


def _number(d, key, path, default=None, lo=None, hi=None, integer=False):
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}{key}", "required field is missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}{key}", f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}{key}", "must be finite")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}{key}", f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(f"{path}{key}", f"must be <= {hi}, got {v}")
    return int(v) if integer else float(v)


def _point(v, path):
    if not (isinstance(v, (list, tuple)) and len(v) == 2
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ConfigError(path, f"expected [x1, x2], got {v!r}")
    return [float(v[0]), float(v[1])]


def _component(c, path):
    if not isinstance(c, dict):
        raise ConfigError(path, "expected a mapping")
    kind = c.get("kind")
    out = {"kind": kind, "center": _point(c.get("center"), path + ".center")}
    if kind == "disk":
        out["radius"] = _number(c, "radius", path + ".", lo=0.0)
    elif kind == "star":
        out["base_radius"] = _number(c, "base_radius", path + ".", lo=0.0)
        out["amplitude"] = _number(c, "amplitude", path + ".")
        out["lobes"] = _number(c, "lobes", path + ".", lo=1, integer=True)
    else:
        raise ConfigError(path + ".kind", f"unknown shape kind {kind!r} (disk, star)")
    if "n_nodes" in c:
        out["n_nodes"] = _number(c, "n_nodes", path + ".", lo=4, integer=True)
    return out


def _geometry(g, path, n_nodes):
    if not isinstance(g, dict):
        raise ConfigError(path, "expected a mapping with 'components'")
    comps = g.get("components")
    if not isinstance(comps, list) or not comps:
        raise ConfigError(path + ".components", "expected a non-empty list")
    name = str(g.get("name", path))
    spec = GeometrySpec(name, tuple(_component(c, f"{path}.components[{i}]") for i, c in enumerate(comps)))
    spec.build(n_nodes)  # cell constraints are checked before any run
    return spec


def _drude(d):
    m = d.get("material", {}) or {}
    if not isinstance(m, dict):
        raise ConfigError("material", "expected a mapping")
    base = DrudeParameters()
    return DrudeParameters(
        _number(m, "hbar_omega_p", "material.", base.hbar_omega_p, lo=0.0),
        _number(m, "hbar_gamma", "material.", base.hbar_gamma, lo=0.0),
        _number(m, "eps_inf", "material.", base.eps_inf),
    )


def _common(d, kind):
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a mapping")
    if "schema_version" not in d:
        raise ConfigError("schema_version", "required field is missing")
    if d["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {d['schema_version']!r} "
                                            f"(expected {SCHEMA_VERSION})")
    if d.get("kind") != kind:
        raise ConfigError("kind", f"expected {kind!r}, got {d.get('kind')!r}")
    n = _number(d, "n_nodes", "", 128, lo=4, integer=True)
    if n % 2:
        raise ConfigError("n_nodes", "must be even")
    return str(d.get("name", kind)), n


def parse_sweep(d) -> SweepConfig:
    name, n = _common(d, "sweep")
    wl = d.get("wavelengths", {"start": 300, "stop": 1500, "count": 241})
    if not isinstance(wl, dict):
        raise ConfigError("wavelengths", "expected {start, stop, count}")
    lo, hi = WAVELENGTH_RANGE_NM
    start = _number(wl, "start", "wavelengths.", lo=lo, hi=hi)
    stop = _number(wl, "stop", "wavelengths.", lo=lo, hi=hi)
    count = _number(wl, "count", "wavelengths.", lo=2, integer=True)
    if not stop > start:
        raise ConfigError("wavelengths.stop", "grid must be strictly increasing (stop > start)")
    geoms = d.get("geometries")
    if not isinstance(geoms, list) or not geoms:
        raise ConfigError("geometries", "expected a non-empty list")
    specs = tuple(_geometry(g, f"geometries[{i}]", n) for i, g in enumerate(geoms))
    names = [g.name for g in specs]
    if len(set(names)) != len(names):
        raise ConfigError("geometries", "geometry names must be unique")
    return SweepConfig(
        name=name,
        geometries=specs,
        n_nodes=n,
        wavelengths_nm=np.linspace(start, stop, count),
        drude=_drude(d),
        delta=_number(d, "delta", "", 0.05, lo=0.0),
        incidence_deg=_number(d, "incidence_deg", "", 0.0, lo=-89.0, hi=89.0),
        threads=_number(d, "threads", "", 1, lo=1, integer=True),
        svg=bool(d.get("svg", True)),
    )


def parse_optimize(d) -> OptimizeConfig:
    name, n = _common(d, "optimize")
    lo, hi = WAVELENGTH_RANGE_NM
    if "starts" in d:
        raw = d["starts"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("starts", "expected a non-empty list")
        starts = tuple(_geometry(g, f"starts[{i}]", n) for i, g in enumerate(raw))
    elif "geometry" in d:
        starts = (_geometry(d["geometry"], "geometry", n),)
    else:
        raise ConfigError("geometry", "required field is missing (or give 'starts')")
    rs = d.get("random_starts")
    if rs is not None:
        if not isinstance(rs, dict):
            raise ConfigError("random_starts", "expected {count, seed, amplitude}")
        rs = {
            "count": _number(rs, "count", "random_starts.", lo=1, integer=True),
            "seed": _number(rs, "seed", "random_starts.", 0, lo=0, integer=True),
            "amplitude": _number(rs, "amplitude", "random_starts.", 0.01, lo=0.0),
        }
    return OptimizeConfig(
        name=name,
        starts=starts,
        wavelength_nm=_number(d, "wavelength_nm", "", lo=lo, hi=hi),
        n_nodes=n,
        drude=_drude(d),
        steps=_number(d, "steps", "", 20, lo=0, integer=True),
        n_modes=_number(d, "n_modes", "", 16, lo=0, integer=True),
        initial_move=_number(d, "initial_move", "", 0.02, lo=0.0),
        random_starts=rs,
        threads=_number(d, "threads", "", 1, lo=1, integer=True),
        svg=bool(d.get("svg", True)),
    )


def load_config(path):
    """Read a YAML config and return a :class:`SweepConfig` or :class:`OptimizeConfig`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"YAML syntax error: {exc}") from None
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "optimize":
        return parse_optimize(d)
    return parse_sweep(d)


def scenario_path(name):
    """Path of a bundled scenario config (``fig2``, ``fig3``, ``fig4``, ``fig5``, ``optimize_disk``)."""
    p = SCENARIO_DIR / f"{name}.yaml"
    if not p.exists():
        raise FileNotFoundError(f"no bundled scenario {name!r}")
    return p
