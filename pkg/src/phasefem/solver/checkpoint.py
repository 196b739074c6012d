"""Checkpoint files: a compressed ``.npz`` archive with a format version.

Layout (all arrays)::

    format_version      int, currently 1
    time, increment     scalars
    field/<name>/values, field/<name>/old
    state/<name>        committed integration-point variables
"""

from __future__ import annotations

import os

import numpy as np

from .coupling import Problem

__all__ = ["FORMAT_VERSION", "save_checkpoint", "load_checkpoint"]

FORMAT_VERSION = 1


def save_checkpoint(problem: Problem, path) -> None:
    data = {
        "format_version": np.array(FORMAT_VERSION),
        "time": np.array(problem.t),
        "increment": np.array(problem.increment),
    }
    for name, f in problem.fields.items():
        data[f"field/{name}/values"] = f.values
        data[f"field/{name}/old"] = f.old
    for name, v in problem.state.items():
        data[f"state/{name}"] = v
    path = os.fspath(path)
    tmp = path + ".tmp.npz"
    np.savez_compressed(tmp, **data)
    os.replace(tmp, path)


def load_checkpoint(problem: Problem, path) -> None:
    """Restore fields and committed state into ``problem`` (trial = committed)."""
    with np.load(path) as z:
        version = int(z["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format {version}")
        problem.t = float(z["time"])
        problem.increment = int(z["increment"])
        for name, f in problem.fields.items():
            f.values[:] = z[f"field/{name}/values"]
            f.old[:] = z[f"field/{name}/old"]
        for key in z.files:
            if key.startswith("state/"):
                name = key[len("state/"):]
                problem.state[name] = z[key].copy()
                problem.trial[name] = z[key].copy()
