import json

import graphviz
import numpy as np
import pytest

from app.cli import run
from app.codec import (
    dumps, family_to_json, graph_to_json, load_json, row_contraction_to_json, tuple_from_json,
    tuple_to_json,
)
from app.config import load_config
from app.families import ProjectionFamily
from app.tuples import OperatorTuple


def write(path, data):
    path.write_text(dumps(data))
    return str(path)


def last_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


@pytest.fixture
def files(tmp_path, example_v, example_v_family, example_v_graph, swap, half):
    return {
        "dir": tmp_path,
        "example_v": write(tmp_path / "v.json", row_contraction_to_json(example_v)),
        "example_v_family": write(tmp_path / "v_family.json", family_to_json(example_v_family)),
        "graph": write(tmp_path / "graph.json", graph_to_json(example_v_graph)),
        "swap": write(tmp_path / "swap.json", tuple_to_json(swap)),
        "half": write(tmp_path / "half.json", row_contraction_to_json(half)),
        "identity": write(tmp_path / "identity.json", family_to_json(ProjectionFamily((np.eye(1),)))),
        "config": write_config(tmp_path),
    }


def write_config(tmp_path, body=""):
    path = tmp_path / "dilat3r.toml"
    path.write_text(body)
    return str(path)


def test_type1(files, capsys):
    assert run(["type1", files["graph"], "--config", files["config"]]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "TypeI"


def test_validate_tuple(files, capsys):
    assert run(["validate-tuple", files["swap"], "--config", files["config"]]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] is True
    assert out["vertex_count"] == 1


def test_validate_tuple_failure(files, capsys):
    r = 1 / np.sqrt(2)
    path = write(files["dir"] / "scaled.json",
                 tuple_to_json(OperatorTuple((np.array([[r]]), np.array([[r]])))))
    assert run(["validate-tuple", path, "--config", files["config"]]) == 2
    error = last_error(capsys)
    assert error["exit_code"] == 2
    assert "initial_idempotent" in error["failed"]


def test_dilate_then_validate(files, capsys):
    out = str(files["dir"] / "out" / "dilation.json")
    assert run(["dilate", "-T", files["half"], "-P", files["identity"], "--depth", "3",
                "-o", out, "--config", files["config"]]) == 0
    data = load_json(out)
    assert data["dim"] == 5
    assert data["mode"] == {"truncated": {"depth": 3, "levels": [-1, 0, 1, 2, 3]}}
    assert len(data["basis_index"]) == 4
    assert tuple_from_json(data).space_dim == 5
    assert run(["validate-tuple", out, "--config", files["config"]]) == 0
    capsys.readouterr()

    assert run(["wold", out, "--config", files["config"]]) == 0
    wold = json.loads(capsys.readouterr().out)
    assert wold["alpha"] == {"0": 1}


def test_depth_from_config(files, capsys):
    config = write_config(files["dir"], "[dilat3r]\ndepth = 2\n")
    assert run(["dilate", "-T", files["half"], "-P", files["identity"], "--config", config]) == 0
    assert json.loads(capsys.readouterr().out)["dim"] == 4


def test_finest_and_family(files, capsys):
    assert run(["finest", "-T", files["example_v"], "--config", files["config"]]) == 0
    finest = json.loads(capsys.readouterr().out)
    assert len(finest["projections"]) == 2

    assert run(["validate-family", "-T", files["example_v"], "-P", files["example_v_family"],
                "--config", files["config"]]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["valid"] is True
    assert report["graph"]["edges"] == [[0, 0], [1, 1], [0, 1]]


def test_predict(files, capsys):
    assert run(["predict", "-T", files["example_v"], "-P", files["example_v_family"],
                "--config", files["config"]]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["fully_coisometric"] is True
    assert out["predicted_alpha"] == {"0": 0, "1": 0}
    assert out["type_one"]["verdict"] == "TypeI"


def test_poset_json_and_dot(files, capsys):
    assert run(["poset", "-T", files["example_v"], "--config", files["config"]]) == 0
    poset = json.loads(capsys.readouterr().out)
    assert poset["count"] == 2
    assert poset["hasse"] == [[0, 1]]

    assert run(["poset", "-T", files["example_v"], "--dot", "--config", files["config"]]) == 0
    assert capsys.readouterr().out.startswith("digraph Families {")


def test_extract_graph_dot(files, capsys):
    assert run(["extract-graph", files["swap"], "--dot", "--config", files["config"]]) == 0
    assert 'v0 -> v0 [label="e0"];' in capsys.readouterr().out


def test_missing_file(files, capsys):
    assert run(["type1", str(files["dir"] / "absent.json"), "--config", files["config"]]) == 1
    assert last_error(capsys)["error"] == "InputError"


def test_malformed_json(files, capsys):
    path = files["dir"] / "broken.json"
    path.write_text("{\"dim\": 1,")
    assert run(["validate-tuple", str(path), "--config", files["config"]]) == 1


def test_non_stabilizing_family(files, capsys):
    P = np.array([[0.5, 0.5], [0.5, 0.5]])
    path = write(files["dir"] / "bad_family.json", family_to_json(ProjectionFamily((P, np.eye(2) - P))))
    assert run(["validate-family", "-T", files["example_v"], "-P", path, "--config", files["config"]]) == 2
    error = last_error(capsys)
    assert error["error"] == "NotStabilizing"
    assert error["op"] == 0


def test_poset_block_cap(files, capsys):
    config = write_config(files["dir"], "[dilat3r]\nmax_blocks = 1\n")
    assert run(["poset", "-T", files["example_v"], "--config", config]) == 3
    assert last_error(capsys)["error"] == "TooManyBlocks"


def test_bad_depth_override(files, capsys):
    assert run(["dilate", "-T", files["half"], "-P", files["identity"], "--depth", "0",
                "--config", files["config"]]) == 2


def test_render_needs_output(files, capsys):
    assert run(["poset", "-T", files["example_v"], "--dot", "--render", "svg",
                "--config", files["config"]]) == 1


def test_usage_errors(capsys):
    assert run([]) == 1
    assert run(["--help"]) == 0
    assert run(["nonsense"]) == 1


def test_row_contraction_file_shapes(files, capsys):
    path = write(files["dir"] / "shapes.json", {"dim": 2, "ops": [{"rows": 1, "cols": 1, "entries": [[0.5]]}]})
    assert run(["finest", "-T", path, "--config", files["config"]]) == 1


def test_pretty_tables(files, capsys):
    assert run(["type1", files["graph"], "--pretty", "--config", files["config"]]) == 0
    assert "TypeI" in capsys.readouterr().out
    assert run(["predict", "-T", files["example_v"], "-P", files["example_v_family"], "--pretty",
                "--config", files["config"]]) == 0
    assert "fully coisometric" in capsys.readouterr().out


ONE = {"rows": 1, "cols": 1, "entries": [[1]]}


@pytest.mark.parametrize("command,data", [
    ("type1", {"vertices": "two", "edges": []}),
    ("type1", {"vertices": 2, "edges": [[0, 5]]}),
    ("type1", {"vertices": True, "edges": []}),
    ("validate-tuple", {"dim": 1, "mode": {"truncated": {"depth": 2, "levels": 5}}, "ops": [ONE]}),
    ("validate-tuple", {"dim": 1, "mode": {"truncated": {"depth": "2", "levels": [0]}}, "ops": [ONE]}),
    ("validate-tuple", {"dim": 1, "mode": {"truncated": {"depth": 2, "levels": [0, 1]}}, "ops": [ONE]}),
    ("validate-tuple", {"dim": "1", "ops": [ONE]}),
    ("validate-tuple", {"dim": 1, "ops": ONE}),
    ("validate-tuple", {"dim": 1, "ops": [{"rows": True, "cols": 1, "entries": [[1]]}]}),
])
def test_malformed_files_exit_one(files, capsys, command, data):
    path = write(files["dir"] / "malformed.json", data)
    assert run([command, path, "--config", files["config"]]) == 1
    assert last_error(capsys)["exit_code"] == 1


def test_family_dimension_mismatch(files, capsys):
    path = write(files["dir"] / "big_family.json", family_to_json(ProjectionFamily((np.eye(3),))))
    assert run(["validate-family", "-T", files["example_v"], "-P", path, "--config", files["config"]]) == 1
    assert last_error(capsys)["error"] == "DimensionMismatch"


def test_unparsable_config(files, capsys):
    config = write_config(files["dir"], "[dilat3r\n")
    assert run(["type1", files["graph"], "--config", config]) == 1
    assert last_error(capsys)["error"] == "InputError"


def test_pretty_table_to_file(files, capsys):
    out = files["dir"] / "table.txt"
    assert run(["type1", files["graph"], "--pretty", "-o", str(out), "--config", files["config"]]) == 0
    assert capsys.readouterr().out == ""
    assert "TypeI" in out.read_text()


def test_dot_to_file_and_render(files, capsys, monkeypatch):
    out = files["dir"] / "graph.dot"
    assert run(["extract-graph", files["swap"], "--dot", "-o", str(out), "--config", files["config"]]) == 0
    assert 'v0 -> v0 [label="e0"];' in out.read_text()

    rendered = []
    monkeypatch.setattr(graphviz, "render", lambda engine, fmt, filepath: rendered.append(filepath) or filepath)
    hasse = files["dir"] / "poset.dot"
    assert run(["poset", "-T", files["example_v"], "--dot", "-o", str(hasse), "--render", "svg",
                "--config", files["config"]]) == 0
    assert hasse.read_text().startswith("digraph Families {")
    assert rendered == [str(hasse)]


def test_init_config(files, capsys):
    out = files["dir"] / "written.toml"
    assert run(["init-config", "-o", str(out), "--eps-rank", "1e-7", "--config", files["config"]]) == 0
    config = load_config(out)
    assert config.tolerance.eps_rank == 1e-7
    assert config.depth == 4
    assert run(["init-config", "-o", str(out), "--config", files["config"]]) == 1
    assert run(["init-config", "-o", str(out), "--force", "--config", files["config"]]) == 0
    assert load_config(out).tolerance.eps_rank == 1e-8


def test_dilate_output_is_deterministic(files, capsys):
    first, second = files["dir"] / "a.json", files["dir"] / "b.json"
    for out in (first, second):
        assert run(["dilate", "-T", files["example_v"], "-P", files["example_v_family"], "--depth", "2",
                    "-o", str(out), "--config", files["config"]]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_finest_output_feeds_validate_family(files, capsys):
    out = files["dir"] / "finest.json"
    assert run(["finest", "-T", files["example_v"], "-o", str(out), "--config", files["config"]]) == 0
    assert run(["validate-family", "-T", files["example_v"], "-P", str(out), "--config", files["config"]]) == 0
    assert json.loads(capsys.readouterr().out)["graph"]["edges"] == [[0, 0], [1, 1], [0, 1]]
