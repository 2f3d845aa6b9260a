import io
import json

import pytest

from perftower.cli import main
from perftower.levelring import PURE, LevelRingSpec
from perftower.simplicial import discrete_points, format_cplx, p_stanley_reisner_tower, path_graph, rp2_six_vertex
from perftower.tower import drop_generator, zp_tower


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, delta in (("rp2", rp2_six_vertex()), ("two", discrete_points(2)), ("path", path_graph(4))):
        paths[name] = tmp_path / f"{name}.cplx"
        paths[name].write_text(format_cplx(delta))
    paths["zp"] = tmp_path / "zp.json"
    paths["zp"].write_text(json.dumps(zp_tower(3).to_dict()))
    paths["fp"] = tmp_path / "fpxy.json"
    paths["fp"].write_text(json.dumps(LevelRingSpec(3, 1, 0, PURE, ("x", "y")).to_dict()))
    paths["root"] = tmp_path
    return paths


def test_reisner_exit_codes(files):
    code, out, _ = run("reisner", files["rp2"], "--p", 2)
    assert code == 1
    rep = json.loads(out)
    assert rep["results"][0]["cohen_macaulay"] is False and rep["witnesses"] == [{"face": [], "q": 1}]
    assert run("reisner", files["rp2"], "--p", 3)[0] == 0
    code, out, _ = run("reisner", files["rp2"], "--p", 2, "--format", "text")
    assert out == "not CM, witness (∅, 1)\n"


def test_report_schema(files):
    code, out, _ = run("check-tower", files["zp"])
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"schema_version", "command", "window", "results", "witnesses"}
    assert rep["schema_version"] == 1 and rep["command"] == "check-tower"
    assert rep["window"] == {"D": 8, "L": 3, "N": 4, "m": 4}
    assert rep["witnesses"] == []


def test_json_is_deterministic(files):
    first = run("compare-tilt", files["zp"])
    second = run("compare-tilt", files["zp"])
    assert first == second and first[0] == 0
    text = first[1]
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_psr_pipeline(files):
    tower = files["root"] / "two.json"
    assert run("psr", files["two"], "--p", 2, "-o", tower)[0] == 0
    for cmd in ("check-tower", "decompose", "tilt", "compare-tilt"):
        code, out, err = run(cmd, tower)
        assert code == 0, (cmd, err)
    code, out, _ = run("koszul", tower, "p", "x2", "--format", "text")
    assert code == 0 and out == "H_0 = Z/2\nH_1 = Z/2\nH_2 = 0\n"


def test_sr_and_koszul_on_ring(files):
    ring = files["root"] / "path.json"
    assert run("sr", files["path"], "--p", 3, "-o", ring)[0] == 0
    code, out, _ = run("koszul", ring, "--format", "text")
    assert out.splitlines()[:3] == ["H_0 = Z/3", "H_1 = (Z/3)^3", "H_2 = (Z/3)^2"]


def test_mutant_fails_with_witness(files):
    t = drop_generator(p_stanley_reisner_tower(discrete_points(2), 3), 1, 0)
    path = files["root"] / "mutant.json"
    path.write_text(json.dumps(t.to_dict()))
    code, out, _ = run("check-tower", path)
    assert code == 1
    assert json.loads(out)["witnesses"]


def test_glue(files):
    code, out, err = run("glue", files["fp"], files["zp"], "--map", "x=0", "--map", "y=0", "--format", "text")
    assert code == 0, err
    assert out.splitlines()[0] == "Z/3^4[x,y]/(p*x, p*y)"


def test_errors(files):
    bad = files["root"] / "bad.json"
    bad.write_text('{"levels": [\n  1,, 2]}')
    code, out, err = run("check-tower", bad)
    assert code == 2 and out == ""
    assert "line 2" in err and "column" in err
    assert run("check-tower", files["root"] / "missing.json")[0] == 2
    assert run("reisner", files["rp2"])[0] == 2
    assert run("glue", files["fp"], files["zp"], "--map", "nonsense")[0] == 2
    assert run("koszul", files["zp"], "pillar", "--levels", "0")[0] == 2
