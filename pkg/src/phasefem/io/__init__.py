"""Configuration files, VTK/CSV output and run orchestration."""

from .atomic import write_atomic
from .config import Config, ConfigError, OutputSpec, config_from_dict, file_sha256, parse_config, serialize_config
from .csvio import read_csv, series_table, write_csv
from .run import RunManifest, RunOutcome, read_manifest, run_config, write_manifest
from .vtk import VtkData, element_average, problem_output, read_vtk, write_series_index, write_vtk

__all__ = [
    "write_atomic",
    "Config",
    "ConfigError",
    "OutputSpec",
    "config_from_dict",
    "file_sha256",
    "parse_config",
    "serialize_config",
    "read_csv",
    "series_table",
    "write_csv",
    "RunManifest",
    "RunOutcome",
    "read_manifest",
    "run_config",
    "write_manifest",
    "VtkData",
    "element_average",
    "problem_output",
    "read_vtk",
    "write_series_index",
    "write_vtk",
]
