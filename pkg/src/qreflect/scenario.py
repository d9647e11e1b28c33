"""Scenario files: schema, parsing, validation, and overrides.

A scenario is a TOML document with sections [units], [particle],
[reflector], [system], [spectrum], [grid], [times], [output] and the
optional per-subcommand sections [observables], [audit], [oracle],
[decoherence].  In SI mode every physical key carries an explicit unit
suffix (mass_kg, v0_m_per_s, pe_J, x1_min_m, t_s, ...); in dimensionless
mode the same keys appear bare.  Unknown keys are rejected with the line
number where they appear; missing required keys name the section.  Files
are self-contained: no includes or external references.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib as _toml
except ImportError:  # python < 3.11
    import tomli as _toml

from .core import BodySpec, make_quadrature
from .slab import SlabScenario, slab_body_from_temperature
from .units import UnitSystem, unit_system
from .wavegroups import WavegroupScenario, make_well_spectrum, thermal_spread


class ScenarioError(Exception):
    """Schema violation or unusable scenario content (CLI exit code 2)."""


# key -> (si_suffix or None if unsuffixed in both modes)
_UNIT_SUFFIX = {
    "mass": "_kg", "v0": "_m_per_s", "dv": "_m_per_s", "temperature": "_K",
    "pe": "_J", "half_width": "_m", "thickness": "_m",
    "x1_min": "_m", "x1_max": "_m", "x2_min": "_m", "x2_max": "_m",
    "t": "_s", "t0": "_s", "t_final": "_s", "dt": "_s",
    "region_min": "_m", "region_max": "_m",
    "l_c_particle": "_m", "t_relax": "_s", "probe_mass": "_kg",
    "slice_x2": "_m", "window_x1_min": "_m", "window_x1_max": "_m",
    "d": "_m",
}

# section -> {base key: (required, type)}
_SCHEMA: dict[str, dict[str, tuple[bool, type]]] = {
    "units": {"mode": (True, str)},
    "particle": {"mass": (True, float), "v0": (True, float), "dv": (False, float)},
    "reflector": {"mass": (True, float), "v0": (True, float), "dv": (False, float),
                  "temperature": (False, float)},
    "system": {"type": (True, str), "pe": (False, float), "half_width": (False, float),
               "thickness": (False, float), "r": (False, float), "n0": (False, int),
               "mode_width": (False, float)},
    "spectrum": {"n_nodes": (False, int), "span_sigmas": (False, float),
                 "dephase_seed": (False, int), "dephase_target": (False, str),
                 "n_v_nodes": (False, int)},
    "grid": {"x1_min": (True, float), "x1_max": (True, float), "nx1": (True, int),
             "x2_min": (True, float), "x2_max": (True, float), "nx2": (True, int)},
    "times": {"t": (True, list)},
    "output": {"dir": (False, str), "prefix": (False, str), "gzip": (False, bool)},
    "observables": {"slice_x2": (False, float), "window_x1_min": (False, float),
                    "window_x1_max": (False, float), "overlap_window_sigmas": (False, float)},
    "audit": {"region_min": (True, float), "region_max": (True, float),
              "t": (True, float), "dt": (True, float)},
    "oracle": {"t0": (True, float), "t_final": (True, float), "dt": (True, float)},
    "decoherence": {"d": (False, float), "temperature": (True, float),
                    "l_c_particle": (False, float), "probe_mass": (False, float),
                    "t_relax": (False, float)},
}

_REQUIRED_SECTIONS = ("units", "particle", "reflector", "system", "spectrum",
                      "grid", "times", "output")

SYSTEM_TYPES = ("mirror", "slab", "finite_barrier", "finite_well", "infinite_well")


def _find_line(text: str, section: str, key: str | None = None) -> int:
    """Best-effort line number of a section or of a key within it."""
    lines = text.splitlines()
    sec_re = re.compile(r"^\s*\[" + re.escape(section) + r"\]")
    in_section = False
    for i, line in enumerate(lines, start=1):
        if sec_re.match(line):
            if key is None:
                return i
            in_section = True
            continue
        if in_section:
            if re.match(r"^\s*\[", line):
                break
            if key is not None and re.match(r"^\s*" + re.escape(key) + r"\s*=", line):
                return i
    return 0


@dataclass(frozen=True)
class ResolvedScenario:
    """A validated scenario with every default made explicit."""

    path: str
    units: UnitSystem
    system: str
    particle: BodySpec
    reflector: BodySpec
    pe: float
    half_width: float          # interaction half width (barrier/well); slab: D/2
    thickness: float           # 2 * half_width
    r: float
    n0: int
    mode_width: float
    n_nodes: int
    span_sigmas: float
    dephase_seed: int | None
    dephase_target: str
    n_v_nodes: int
    x1_axis: np.ndarray
    x2_axis: np.ndarray
    times: tuple[float, ...]
    out_dir: str
    prefix: str
    gzip: bool
    observables: dict
    audit: dict | None
    oracle: dict | None
    decoherence: dict | None
    applied_defaults: tuple[str, ...]
    overrides: tuple[str, ...]
    raw: dict = field(repr=False, default_factory=dict)

    def wavegroup_scenario(self) -> WavegroupScenario:
        if self.system == "slab":
            raise ScenarioError("slab scenarios use slab_scenario()")
        if self.system == "infinite_well":
            spectrum = make_well_spectrum(self.particle.mass, self.reflector, self.units,
                                          d=self.half_width, n0=self.n0,
                                          mode_width=self.mode_width,
                                          n_v_nodes=self.n_v_nodes,
                                          span_sigmas=self.span_sigmas,
                                          dephase_seed=self.dephase_seed)
        else:
            spectrum = tuple(make_quadrature(self.particle, self.reflector,
                                             n_nodes=self.n_nodes,
                                             span_sigmas=self.span_sigmas,
                                             dephase_seed=self.dephase_seed,
                                             dephase_target=self.dephase_target))
        return WavegroupScenario(system=self.system, particle=self.particle,
                                 reflector=self.reflector, units=self.units,
                                 spectrum=spectrum, pe=self.pe, d=self.half_width,
                                 well_n0=self.n0, well_mode_width=self.mode_width)

    def slab_scenario(self) -> SlabScenario:
        if self.system != "slab":
            raise ScenarioError("not a slab scenario")
        spectrum = tuple(make_quadrature(self.particle, self.reflector,
                                         n_nodes=self.n_nodes, span_sigmas=self.span_sigmas,
                                         dephase_seed=self.dephase_seed,
                                         dephase_target=self.dephase_target))
        temp = self.raw.get("reflector", {}).get("temperature")
        return SlabScenario(particle=self.particle, slab=self.reflector,
                            d_thickness=self.thickness, r=self.r, units=self.units,
                            spectrum=spectrum, temperature=temp)


def _suffixed(key: str, si: bool) -> str:
    suf = _UNIT_SUFFIX.get(key)
    return key + suf if (si and suf) else key


def _read_section(raw: dict, text: str, section: str, si: bool,
                  defaults_log: list[str]) -> dict:
    schema = _SCHEMA[section]
    content = raw.get(section)
    if content is None:
        if section in _REQUIRED_SECTIONS:
            raise ScenarioError(f"missing required section [{section}]")
        return {}
    if not isinstance(content, dict):
        raise ScenarioError(f"section [{section}] must be a table")
    allowed = {_suffixed(k, si): k for k in schema}
    out = {}
    for file_key, value in content.items():
        base = allowed.get(file_key)
        if base is None:
            line = _find_line(text, section, file_key)
            wanted = _suffixed(file_key, si) if file_key in schema else None
            hint = f" (expected {wanted!r} in SI mode)" if wanted and wanted != file_key else ""
            raise ScenarioError(
                f"line {line}: unknown key {file_key!r} in section [{section}]{hint}")
        required, typ = schema[base]
        if typ is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if typ is not list and not isinstance(value, typ):
            line = _find_line(text, section, file_key)
            raise ScenarioError(
                f"line {line}: key {file_key!r} in [{section}] must be {typ.__name__}")
        out[base] = value
    for base, (required, _typ) in schema.items():
        if required and base not in out:
            raise ScenarioError(
                f"section [{section}] is missing required key {_suffixed(base, si)!r}")
    return out


def apply_overrides(raw: dict, overrides: list[str]) -> list[str]:
    """Apply --set section.key=value pairs (TOML literal values) in place."""
    applied = []
    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ScenarioError(f"override {ov!r} must look like section.key=value")
        target, literal = ov.split("=", 1)
        section, key = target.split(".", 1)
        try:
            value = _toml.loads(f"x = {literal}")["x"]
        except _toml.TOMLDecodeError as exc:
            raise ScenarioError(f"override {ov!r}: bad value literal ({exc})")
        raw.setdefault(section, {})[key] = value
        applied.append(f"{section}.{key}={literal}")
    return applied


def load_scenario(path: str | Path, overrides: list[str] | None = None) -> ResolvedScenario:
    path = Path(path)
    text = path.read_text()
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ScenarioError(f"TOML parse error: {exc}")
    override_log = apply_overrides(raw, overrides or [])

    for section in raw:
        if section not in _SCHEMA:
            line = _find_line(text, section)
            raise ScenarioError(f"line {line}: unknown section [{section}]")

    units_raw = _read_section(raw, text, "units", si=False, defaults_log=[])
    units = unit_system(units_raw["mode"])
    si = units.mode == "si"

    defaults: list[str] = []
    sec = {name: _read_section(raw, text, name, si, defaults) for name in _SCHEMA}

    def default(section: str, key: str, value):
        got = sec[section].get(key)
        if got is None:
            defaults.append(f"{section}.{_suffixed(key, si)}={value!r}")
            return value
        return got

    system = sec["system"]["type"]
    if system not in SYSTEM_TYPES:
        line = _find_line(text, "system", "type")
        raise ScenarioError(f"line {line}: unknown system type {system!r}")

    particle = BodySpec(mass=sec["particle"]["mass"], v0=sec["particle"]["v0"],
                        dv=default("particle", "dv", 0.0))
    r_dv = sec["reflector"].get("dv")
    r_temp = sec["reflector"].get("temperature")
    if r_dv is None and r_temp is not None:
        r_dv = thermal_spread(sec["reflector"]["mass"], r_temp, units)
        defaults.append(f"reflector.{_suffixed('dv', si)}={r_dv!r} (thermal at T={r_temp})")
    elif r_dv is None:
        r_dv = default("reflector", "dv", 0.0)
    reflector = BodySpec(mass=sec["reflector"]["mass"], v0=sec["reflector"]["v0"], dv=r_dv)

    half = sec["system"].get("half_width")
    thick = sec["system"].get("thickness")
    if half is not None and thick is not None:
        if not math.isclose(2.0 * half, thick, rel_tol=1e-12):
            raise ScenarioError("half_width and thickness disagree (thickness = 2 * half_width)")
    if half is None and thick is not None:
        half = 0.5 * thick
    if thick is None and half is not None:
        thick = 2.0 * half
    if half is None:
        if system in ("slab", "finite_barrier", "finite_well", "infinite_well"):
            raise ScenarioError(f"system {system!r} requires half_width or thickness in [system]")
        half = thick = 0.0

    pe = sec["system"].get("pe")
    if system in ("finite_barrier", "finite_well"):
        if pe is None:
            raise ScenarioError(f"system {system!r} requires pe in [system]")
    else:
        pe = default("system", "pe", 0.0) if pe is None else pe
    r_amp = sec["system"].get("r")
    if system == "slab" and r_amp is None:
        raise ScenarioError("slab system requires the surface reflection amplitude r")
    n0 = sec["system"].get("n0", 0)
    mode_width = sec["system"].get("mode_width", 0.0)
    if system == "infinite_well" and (n0 < 1 or mode_width <= 0.0):
        raise ScenarioError("infinite_well requires n0 >= 1 and mode_width > 0 in [system]")

    g = sec["grid"]
    if g["nx1"] < 2 or g["nx2"] < 2 or g["x1_max"] <= g["x1_min"] or g["x2_max"] <= g["x2_min"]:
        raise ScenarioError("grid must have nx >= 2 and max > min on both axes")
    x1_axis = np.linspace(g["x1_min"], g["x1_max"], g["nx1"])
    x2_axis = np.linspace(g["x2_min"], g["x2_max"], g["nx2"])

    times_raw = sec["times"]["t"]
    if not isinstance(times_raw, list) or not times_raw or \
            not all(isinstance(x, (int, float)) for x in times_raw):
        raise ScenarioError(f"[times] key {_suffixed('t', si)!r} must be a non-empty number array")

    out_dir = default("output", "dir", "")
    prefix = default("output", "prefix", path.stem)
    gz = default("output", "gzip", False)

    return ResolvedScenario(
        path=str(path), units=units, system=system, particle=particle, reflector=reflector,
        pe=pe, half_width=float(half), thickness=float(thick),
        r=float(r_amp if r_amp is not None else 0.0),
        n0=int(n0), mode_width=float(mode_width),
        n_nodes=int(default("spectrum", "n_nodes", 64)),
        span_sigmas=float(default("spectrum", "span_sigmas", 4.0)),
        dephase_seed=sec["spectrum"].get("dephase_seed"),
        dephase_target=str(default("spectrum", "dephase_target", "both")),
        n_v_nodes=int(default("spectrum", "n_v_nodes", 48)),
        x1_axis=x1_axis, x2_axis=x2_axis,
        times=tuple(float(x) for x in times_raw),
        out_dir=out_dir, prefix=prefix, gzip=bool(gz),
        observables=sec["observables"], audit=sec["audit"] or None,
        oracle=sec["oracle"] or None, decoherence=sec["decoherence"] or None,
        applied_defaults=tuple(defaults), overrides=tuple(override_log), raw=raw)
