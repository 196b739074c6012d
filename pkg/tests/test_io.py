import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasefem.io import (
    ConfigError,
    config_from_dict,
    file_sha256,
    parse_config,
    read_csv,
    read_manifest,
    read_vtk,
    run_config,
    serialize_config,
    write_csv,
    write_vtk,
)
from phasefem.mesh import generate_structured
from phasefem.scenarios import ProbeSeries, SpecError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "benchmarks" / "configs"

MINIMAL_HEAT = """
[scenario]
kind = "heat"

[materials.heat]
rho = 1.0
c_T = 1.0
k0 = 1.0
"""

QUENCH_NO_GC = """
[scenario]
kind = "quenching"

[materials.elastic]
E = "370e9 Pa"
nu = 0.3
alpha_T = 7.5e-6

[materials.fracture]
ell = 1e-4

[materials.heat]
rho = 3980.0
c_T = 880.0
k0 = 31.0

[materials.loading]
T0 = 600.0
T_a = 20.0
"""


def write(tmp_path, text, name="case.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


# ----------------------------------------------------------------- config


def test_minimal_heat_config(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL_HEAT))
    assert cfg.kind == "heat" and cfg.units == "SI"
    assert cfg.spec.section("heat")["k0"] == 1.0


def test_missing_toughness_is_named(tmp_path):
    with pytest.raises(SpecError) as info:
        parse_config(write(tmp_path, QUENCH_NO_GC))
    assert "G_c" in str(info.value)


def test_negative_length_scale(tmp_path):
    text = QUENCH_NO_GC.replace("ell = 1e-4", "ell = -1e-4\nG_c = 42.47")
    with pytest.raises(SpecError) as info:
        parse_config(write(tmp_path, text))
    assert "ell" in str(info.value)


def test_unit_mismatch_names_expected_unit(tmp_path):
    text = QUENCH_NO_GC.replace('"370e9 Pa"', '"370 GPa"').replace("ell = 1e-4", "ell = 1e-4\nG_c = 42.47")
    with pytest.raises(SpecError) as info:
        parse_config(write(tmp_path, text))
    msg = str(info.value)
    assert "materials.elastic.E" in msg and "[Pa]" in msg


def test_unknown_scenario_and_keys(tmp_path):
    with pytest.raises(SpecError, match="scenario.kind"):
        parse_config(write(tmp_path, '[scenario]\nkind = "volcano"\n'))
    with pytest.raises(SpecError, match="schedule.dtt"):
        parse_config(write(tmp_path, MINIMAL_HEAT + "[schedule]\ndtt = 0.1\n"))
    with pytest.raises(SpecError, match="materials.heat.k1"):
        parse_config(write(tmp_path, MINIMAL_HEAT + "k1 = 2.0\n"))


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.toml")
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "[scenario\nkind="))


def test_mesh_file_resolved_relative_to_config(tmp_path):
    from phasefem.gmsh import write_mesh

    (tmp_path / "m").mkdir()
    write_mesh(generate_structured([(0, 1), (0, 1)], [2, 2], "quad4"), tmp_path / "m" / "sq.msh")
    cfg = parse_config(write(tmp_path, MINIMAL_HEAT + '[mesh]\nfile = "m/sq.msh"\n'))
    assert Path(cfg.spec.geometry["mesh_file"]).is_absolute()
    with pytest.raises(SpecError, match="mesh.file"):
        parse_config(write(tmp_path, MINIMAL_HEAT + '[mesh]\nfile = "m/none.msh"\n', "b.toml"))


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_benchmark_configs_round_trip(path, tmp_path):
    cfg = parse_config(path)
    text = serialize_config(cfg)
    again = parse_config(write(tmp_path, text))
    assert again == cfg
    assert serialize_config(again) == text


@settings(max_examples=30)
@given(dt=st.floats(1e-4, 1.0), k0=st.floats(1e-3, 1e3), cadence=st.integers(1, 50),
       fields=st.lists(st.sampled_from(["T"]), max_size=1, unique=True))
def test_round_trip_fixed_point(dt, k0, cadence, fields):
    doc = {"scenario": {"kind": "heat"}, "materials": {"heat": {"rho": 1.0, "c_T": 2.0, "k0": k0}},
           "schedule": {"dt": dt, "t_end": 10 * dt}, "output": {"cadence": cadence, "fields": fields}}
    cfg = config_from_dict(doc)
    from phasefem.io.config import tomllib

    back = config_from_dict(tomllib.loads(serialize_config(cfg)))
    assert back == cfg


# ----------------------------------------------------------------- VTK


def test_single_cell_vtk(tmp_path):
    mesh = generate_structured([(0, 1), (0, 1)], [1, 1], "quad4")
    phi = np.array([0.1, 1.0 / 3.0, np.pi / 10, 1e-17])
    path = write_vtk(mesh, {"phi": phi, "u": np.arange(8.0).reshape(4, 2)}, tmp_path / "one.vtk", time=2.5,
                     cell_data={"H": np.array([7.0])})
    d = read_vtk(path)
    assert len(d.cells) == 1 and d.cell_types == [9]
    assert np.abs(d.point_data["phi"] - phi).max() <= 1e-12
    assert np.array_equal(d.point_data["u"][:, :2], np.arange(8.0).reshape(4, 2))
    assert d.cell_data["H"][0] == 7.0 and d.time == 2.5
    text = path.read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n") and "\r" not in text


def test_geometry_only_vtk(tmp_path):
    mesh = generate_structured([(0, 1), (0, 1), (0, 1)], [1, 1, 2], "hex8")
    d = read_vtk(write_vtk(mesh, {}, tmp_path / "g.vtk"))
    assert d.point_data == {} and d.cell_types == [12, 12] and "POINT_DATA" not in (tmp_path / "g.vtk").read_text()


def test_vtk_rejects_wrong_size(tmp_path):
    mesh = generate_structured([(0, 1), (0, 1)], [1, 1], "quad4")
    with pytest.raises(ValueError):
        write_vtk(mesh, {"phi": np.zeros(3)}, tmp_path / "bad.vtk")


@settings(max_examples=25)
@given(st.lists(st.floats(-1e300, 1e300, allow_nan=False), min_size=9, max_size=9))
def test_vtk_values_round_trip_exactly(tmp_path_factory, vals):
    mesh = generate_structured([(0, 1), (0, 1)], [2, 2], "quad4")
    path = tmp_path_factory.mktemp("v") / "r.vtk"
    d = read_vtk(write_vtk(mesh, {"s": np.array(vals)}, path))
    assert np.array_equal(d.point_data["s"], np.array(vals))


# ----------------------------------------------------------------- CSV


def test_two_column_csv(tmp_path):
    s = {"p_center": ProbeSeries("p_center", [0.0, 20.0, 40.0], [0.0, 1e6, 2.000000000000001e6])}
    path = write_csv(s, tmp_path / "p.csv")
    header, rows = read_csv(path)
    assert header == ["t", "p_center"]
    assert rows == [[0.0, 0.0], [20.0, 1e6], [40.0, 2.000000000000001e6]]
    assert path.read_bytes().count(b"\n") == 4 and b"\r" not in path.read_bytes()


def test_empty_series_gives_header_only(tmp_path):
    path = write_csv({"p_center": ProbeSeries("p_center")}, tmp_path / "e.csv")
    assert path.read_text() == "t,p_center\n"


def test_nan_refused_with_increment(tmp_path):
    s = {"p": ProbeSeries("p", [0.0, 1.0, 2.0], [0.0, 1.0, float("nan")])}
    with pytest.raises(ValueError, match="increment 2"):
        write_csv(s, tmp_path / "n.csv")
    assert not (tmp_path / "n.csv").exists()


# ----------------------------------------------------------------- runs


def test_run_outputs_manifest_and_determinism(tmp_path):
    src = CONFIGS / "heat_bar.toml"
    cfg = parse_config(src)
    a = run_config(cfg, tmp_path / "a")
    run_config(parse_config(src), tmp_path / "b")
    m = read_manifest(tmp_path / "a")
    assert m.config_sha256 == file_sha256(src) and m.completed and not m.solver_failed
    assert m.increments == 10 and a.manifest.finished
    for name in m.files:
        if name.endswith((".csv", ".vtk", ".series")):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    assert sorted(n for n in m.files if n.endswith(".vtk")) == ["heat_00000.vtk", "heat_00005.vtk", "heat_00010.vtk"]
    index = json.loads((tmp_path / "a" / "heat.vtk.series").read_text())
    assert [f["time"] for f in index["files"]] == pytest.approx([0.0, 0.05, 0.1])
    header, rows = read_csv(tmp_path / "a" / "heat_probes.csv")
    assert header == ["t", "T_max", "T_mean"] and len(rows) == 11


def test_increment_limit_is_not_a_failure(tmp_path):
    out = run_config(parse_config(CONFIGS / "heat_bar.toml"), tmp_path, max_increments=3)
    assert out.manifest.increments == 3 and not out.manifest.completed and not out.manifest.solver_failed
