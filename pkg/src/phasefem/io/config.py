"""TOML run configurations: parsing, validation and serialisation.

A configuration has the sections ``[scenario]`` (``kind``, optional
``units``), ``[mesh]`` (heat runs only: ``file`` or ``bounds``/``divisions``/
``element``), ``[geometry]``, ``[materials.<section>]``, ``[schedule]`` and
``[output]``. Geometry, schedule and optional material parameters fall back
to the reference values of the scenario; required material symbols must be
given explicitly. Material values may be plain numbers or strings such as
``"210e9 Pa"`` whose unit must equal the expected one (no conversion is done).
"""

from __future__ import annotations

import copy
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import tomli_w

from ..scenarios.spec import DEFAULTS, KINDS, REQUIRED, UNIT_SYSTEMS, ScenarioSpec, SpecError, deep_merge

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "OutputSpec",
    "Config",
    "FIELDS",
    "parse_config",
    "config_from_dict",
    "serialize_config",
    "file_sha256",
]

LENGTH_UNIT = {"SI": "m", "mm-N-s": "mm"}

# nodal fields of each scenario kind
FIELDS: Dict[str, List[str]] = {
    "heat": ["T"],
    "quenching": ["T", "u", "phi"],
    "pressurized_crack": ["u", "phi", "p"],
    "injection": ["u", "phi", "p"],
    "hydrogen_plate": ["u", "phi", "c"],
    "pit_free": ["phi", "c"],
    "pit_scc": ["phi", "c", "u"],
}
CELL_FIELDS = ["sigma_h", "eqps", "H"]

_SCHEDULE_COMMON = {"dt", "t_end", "scheme", "passes", "pass_tol", "tol_rel", "max_iter", "max_increments", "k_res"}
_SCHEDULE_EXTRA = {"hydrogen_plate": {"transport", "split"}, "pit_scc": {"mechanics"}}
_GEOMETRY_EXTRA = {"hydrogen_plate": {"exposed"}, "injection": {"h_z"}}
_MESH_KEYS = {"file": "mesh_file", "bounds": "bounds", "divisions": "divisions", "element": "element"}
_OUTPUT_KEYS = {"fields", "probes", "cadence", "vtk", "csv"}


class ConfigError(SpecError):
    """The configuration file cannot be read or parsed."""


@dataclass
class OutputSpec:
    """What a run writes: VTK fields every ``cadence`` increments and CSV probe columns."""

    fields: List[str] = field(default_factory=list)
    probes: List[str] = field(default_factory=list)
    cadence: int = 1
    vtk: bool = True
    csv: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {"fields": list(self.fields), "probes": list(self.probes), "cadence": self.cadence,
                "vtk": self.vtk, "csv": self.csv}


@dataclass
class Config:
    spec: ScenarioSpec
    output: OutputSpec
    source: Optional[Path] = None
    sha256: str = ""

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def units(self) -> str:
        return self.spec.units

    def to_dict(self) -> Dict[str, Any]:
        s = self.spec
        return {
            "scenario": {"kind": s.kind, "units": s.units},
            "geometry": copy.deepcopy(s.geometry),
            "materials": copy.deepcopy(s.materials),
            "schedule": copy.deepcopy(s.schedule),
            "output": self.output.to_dict(),
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, Config) and self.to_dict() == other.to_dict()


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _table(doc: Mapping, key: str, path: str) -> Dict[str, Any]:
    v = doc.get(key, {})
    if not isinstance(v, Mapping):
        raise SpecError(path, f"expected a table, got {type(v).__name__}")
    return dict(v)


def _reject_unknown(given: Mapping, allowed, path: str) -> None:
    extra = sorted(set(given) - set(allowed))
    if extra:
        prefix = f"{path}." if path else ""
        raise SpecError(f"{prefix}{extra[0]}", f"unknown key; expected one of {', '.join(sorted(allowed))}")


def _quantity(value, unit: str, path: str):
    """Number (or bool flag) from a config value; ``"<number> <unit>"`` strings are unit-checked."""
    if isinstance(value, bool) or isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        parts = value.split(None, 1)
        try:
            number = float(parts[0])
        except (ValueError, IndexError):
            raise SpecError(path, f"expected a number in [{unit}], got {value!r}") from None
        given = parts[1].strip() if len(parts) > 1 else ""
        if given != unit:
            raise SpecError(path, f"unit mismatch: expected [{unit}], got [{given or 'none'}]")
        return number
    raise SpecError(path, f"expected a number in [{unit}], got {value!r}")


def _materials(kind: str, units: str, given: Mapping) -> Dict[str, Dict[str, Any]]:
    defaults = DEFAULTS[kind]["materials"]
    required = REQUIRED[kind]
    table = UNIT_SYSTEMS[units]
    allowed_sections = set(defaults) | set(required)
    _reject_unknown(given, allowed_sections, "materials")
    out: Dict[str, Dict[str, Any]] = {}
    for sec in sorted(allowed_sections):
        req = set(required.get(sec, []))
        optional = {k: v for k, v in defaults.get(sec, {}).items() if k not in req}
        user = given.get(sec, {})
        if not isinstance(user, Mapping):
            raise SpecError(f"materials.{sec}", "expected a table")
        _reject_unknown(user, set(defaults.get(sec, {})) | req, f"materials.{sec}")
        merged = dict(optional)
        for k, v in user.items():
            merged[k] = _quantity(v, table.get(k, "-"), f"materials.{sec}.{k}")
        if merged:
            out[sec] = merged
    return out


def _geometry(kind: str, units: str, given: Mapping, mesh: Mapping, base: Optional[Path]) -> Dict[str, Any]:
    defaults = DEFAULTS[kind]["geometry"]
    allowed = set(defaults) | _GEOMETRY_EXTRA.get(kind, set())
    _reject_unknown(given, allowed, "geometry")
    if mesh and kind != "heat":
        raise SpecError("mesh", f"scenario {kind} builds its own mesh from [geometry]; [mesh] is only for heat runs")
    _reject_unknown(mesh, _MESH_KEYS, "mesh")
    geo = deep_merge(defaults, given)
    for k, v in mesh.items():
        target = _MESH_KEYS[k]
        if target in given:
            raise SpecError(f"mesh.{k}", f"also given as geometry.{target}")
        geo[target] = v
    unit = LENGTH_UNIT[units]
    for k, d in defaults.items():
        v = geo[k]
        if isinstance(d, bool):
            continue
        if isinstance(d, (int, float)) and d > 0 and not (isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0):
            raise SpecError(f"geometry.{k}", f"must be a positive number [{unit}], got {v!r}")
        if isinstance(d, (list, dict, str)) and not isinstance(v, type(d)):
            raise SpecError(f"geometry.{k}", f"expected a {type(d).__name__}, got {v!r}")
    if geo.get("mesh_file"):
        p = Path(geo["mesh_file"])
        if not p.is_absolute() and base is not None:
            p = base / p
        if not p.exists():
            raise SpecError("mesh.file", f"no such mesh file: {p}")
        geo["mesh_file"] = str(p.resolve())
    return geo


def _output(kind: str, given: Mapping) -> OutputSpec:
    _reject_unknown(given, _OUTPUT_KEYS, "output")
    probes_all = DEFAULTS[kind]["probes"]
    fields_all = FIELDS[kind] + CELL_FIELDS
    out = OutputSpec(fields=list(given.get("fields", fields_all)), probes=list(given.get("probes", probes_all)),
                     cadence=given.get("cadence", 1), vtk=given.get("vtk", True), csv=given.get("csv", True))
    for name in out.fields:
        if name not in fields_all:
            raise SpecError("output.fields", f"unknown field {name!r} for {kind}; expected any of {', '.join(fields_all)}")
    for name in out.probes:
        if name not in probes_all:
            raise SpecError("output.probes", f"unknown probe {name!r} for {kind}; expected any of {', '.join(probes_all)}")
    if isinstance(out.cadence, bool) or not isinstance(out.cadence, int) or out.cadence < 1:
        raise SpecError("output.cadence", f"must be a positive number of increments, got {out.cadence!r}")
    for k in ("vtk", "csv"):
        if not isinstance(getattr(out, k), bool):
            raise SpecError(f"output.{k}", f"expected true or false, got {getattr(out, k)!r}")
    return out


def config_from_dict(doc: Mapping, base: Optional[Path] = None) -> Config:
    """Validated :class:`Config` from an already parsed document."""
    _reject_unknown(doc, {"scenario", "mesh", "geometry", "materials", "schedule", "output"}, "")
    sc = _table(doc, "scenario", "scenario")
    _reject_unknown(sc, {"kind", "units"}, "scenario")
    if "kind" not in sc:
        raise SpecError("scenario.kind", f"missing; expected one of {', '.join(KINDS)}")
    kind = sc["kind"]
    if kind not in KINDS:
        raise SpecError("scenario.kind", f"unknown scenario {kind!r}; expected one of {', '.join(KINDS)}")
    units = DEFAULTS[kind]["units"]
    if sc.get("units", units) != units:
        raise SpecError("scenario.units", f"unit mismatch: {kind} uses the {units!r} system, got {sc['units']!r}")
    geometry = _geometry(kind, units, _table(doc, "geometry", "geometry"), _table(doc, "mesh", "mesh"), base)
    materials = _materials(kind, units, _table(doc, "materials", "materials"))
    sched_in = _table(doc, "schedule", "schedule")
    _reject_unknown(sched_in, _SCHEDULE_COMMON | set(DEFAULTS[kind]["schedule"]) | _SCHEDULE_EXTRA.get(kind, set()),
                    "schedule")
    schedule = deep_merge(DEFAULTS[kind]["schedule"], sched_in)
    output = _output(kind, _table(doc, "output", "output"))
    spec = ScenarioSpec(kind=kind, geometry=geometry, materials=materials, schedule=schedule,
                        probes=list(output.probes), units=units)
    spec.validate()
    cfg = Config(spec, output, None, "")
    cfg.sha256 = hashlib.sha256(serialize_config(cfg).encode()).hexdigest()
    return cfg


def parse_config(path) -> Config:
    """Read and validate a TOML configuration file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise ConfigError("<file>", f"configuration file not found: {path}") from None
    except OSError as err:
        raise ConfigError("<file>", f"cannot read {path}: {err}") from None
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as err:
        raise ConfigError("<file>", f"{path}: {err}") from None
    cfg = config_from_dict(doc, base=path.parent)
    cfg.source = path
    cfg.sha256 = hashlib.sha256(raw).hexdigest()
    return cfg


def serialize_config(cfg: Config) -> str:
    """TOML text that parses back to an equal :class:`Config`."""
    return tomli_w.dumps(_plain(cfg.to_dict()))


def _plain(v):
    if isinstance(v, Mapping):
        return {k: _plain(x) for k, x in v.items() if x is not None}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v
