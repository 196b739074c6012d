"""Run orchestration: scenario execution with VTK/CSV output and a run manifest."""

from __future__ import annotations

import datetime as _dt
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .. import __version__
from ..scenarios import run_case
from ..solver import INCREMENT_LIMIT
from .atomic import write_atomic
from .config import Config, serialize_config
from .csvio import series_table, write_csv
from .vtk import problem_output, write_series_index, write_vtk

__all__ = ["RunManifest", "RunOutcome", "run_config", "write_manifest", "read_manifest"]

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    kind: str
    config_sha256: str
    config_path: str
    version: str
    started: str
    finished: str = ""
    increments: int = 0
    completed: bool = False
    message: str = ""
    solver_failed: bool = False
    files: List[str] = field(default_factory=list)


@dataclass
class RunOutcome:
    manifest: RunManifest
    metrics: Dict[str, Any]
    out_dir: Path


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(m: RunManifest, out_dir) -> Path:
    return write_atomic(Path(out_dir) / MANIFEST_NAME, json.dumps(asdict(m), indent=1) + "\n")


def read_manifest(out_dir) -> RunManifest:
    return RunManifest(**json.loads((Path(out_dir) / MANIFEST_NAME).read_text()))


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def run_config(cfg: Config, out_dir, max_increments: Optional[int] = None, scheme: Optional[str] = None) -> RunOutcome:
    """Run the scenario of ``cfg`` and write its outputs into ``out_dir``.

    Outputs are the resolved configuration, per-increment VTK files with a
    ``.vtk.series`` index, a probe CSV, the scalar metrics and the manifest.
    Solver failures are recorded in the manifest (``completed = false``)
    rather than raised.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = cfg.spec
    if max_increments is not None:
        spec.schedule["max_increments"] = int(max_increments)
    if scheme is not None:
        spec.schedule["scheme"] = scheme
    spec.validate()
    manifest = RunManifest(kind=spec.kind, config_sha256=cfg.sha256,
                           config_path=str(cfg.source) if cfg.source else "", version=__version__, started=_now())
    files: List[str] = []
    files.append(write_atomic(out / "config.resolved.toml", serialize_config(cfg)).name)
    write_manifest(manifest, out)
    series_entries = []
    o = cfg.output

    def emit(problem, t):
        k = problem.increment
        if k % o.cadence:
            return
        point, cell = problem_output(problem, o.fields)
        name = f"{spec.kind}_{k:05d}.vtk"
        write_vtk(problem.mesh, point, out / name, time=t, cell_data=cell)
        series_entries.append((name, t))
        files.append(name)

    hooks = [emit] if o.vtk else []
    res = run_case(spec, hooks=hooks)
    if series_entries:
        files.append(write_series_index(series_entries, out / f"{spec.kind}.vtk.series").name)
    if o.csv:
        header, rows = series_table({n: res.series[n] for n in o.probes if n in res.series})
        files.append(write_csv((header, rows), out / f"{spec.kind}_probes.csv").name)
    metrics = _jsonable(res.metrics)
    files.append(write_atomic(out / "metrics.json", json.dumps(metrics, indent=1, sort_keys=True) + "\n").name)
    n_inc = max(len(next(iter(res.series.values())).times) - 1, 0) if res.series else 0
    manifest.finished = _now()
    manifest.increments = n_inc
    manifest.completed = bool(res.completed)
    manifest.message = res.message
    manifest.solver_failed = not res.completed and res.message != INCREMENT_LIMIT
    manifest.files = files
    write_manifest(manifest, out)
    if manifest.solver_failed:
        log.error("run stopped early: %s", res.message)
    return RunOutcome(manifest, metrics, out)
