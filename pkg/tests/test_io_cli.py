import json
import subprocess
import sys

import numpy as np
import pytest

from ospos import io
from ospos.cli import RunConfig, main, run
from ospos.errors import ParseError, SchemaError
from ospos.linalg import Subspace

THETA = {"ambient_dim": 3, "matrix": {"entries": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}}
H_PLUS = {"ambient_dim": 3, "span": [[1, 0, 0.5]]}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_roundtrip_matrix():
    M = np.array([[1 + 2j, 0.5], [-1, 3j]])
    enc = io.encode_matrix(M)
    assert enc["dim"] == 2
    assert np.allclose(io.decode_matrix(json.loads(io.dumps(enc))), M)


def test_roundtrip_subspace(rng):
    S = Subspace.span(rng.standard_normal((4, 2)))
    back = io.decode_subspace(json.loads(io.dumps(io.encode_subspace(S))))
    assert back.same_as(S)


def test_num_non_finite():
    assert io.num(float("inf")) == "inf" and io.num(float("nan")) == "nan"


def test_parse_errors():
    with pytest.raises(SchemaError):
        io.parse_json("   ")
    with pytest.raises(ParseError, match="line 1"):
        io.parse_json("{bad")
    with pytest.raises(SchemaError, match="theta"):
        io.validate({"H_plus": H_PLUS}, "geometry_input")


def test_dim_mismatch_declared():
    with pytest.raises(SchemaError):
        io.decode_matrix({"dim": 3, "entries": [[1, 0], [0, 1]]})


def test_geometry_report(tmp_path):
    path = write(tmp_path, "g.json", {"theta": THETA, "H_plus": H_PLUS})
    code, text = run(RunConfig("geometry", 1e-10, input_path=path))
    assert code == 0
    doc = json.loads(text)
    r = doc["results"]
    assert doc["module"] == "reflection-geometry" and doc["status"] == "ok"
    assert r["os_positivity"]["is_psd"] and r["os_positivity"]["min_eigenvalue"] == pytest.approx(0.6)
    assert r["plus_cap_theta_plus_dim"] == 0
    assert r["extended_intersection_kernel"]["holds"]
    assert r["extended_intersection_kernel"]["kernel"]["dim"] == 1
    assert r["is_maximal"] is False


def test_deterministic_output(tmp_path):
    path = write(tmp_path, "g.json", {"theta": THETA, "H_plus": H_PLUS})
    a = run(RunConfig("geometry", 1e-10, input_path=path))[1]
    b = run(RunConfig("geometry", 1e-10, input_path=path))[1]
    assert a == b


def test_geometry_one_dim():
    code, text = run(RunConfig("geometry", 1e-10, options={"alpha": 0.5, "c": "0.5,0.5"}))
    r = json.loads(text)["results"]
    assert code == 0 and r["bound"] is True and r["direct"]["is_psd"] is True


def test_renorm_report(tmp_path):
    path = write(tmp_path, "r.json", {"theta": THETA, "H_plus": H_PLUS,
                                      "H_zero": {"ambient_dim": 3, "span": [[1, 0, 0]]}})
    code, text = run(RunConfig("renorm", 1e-10, input_path=path))
    r = json.loads(text)["results"]
    assert code == 0 and r["k_dim"] == 1
    assert r["inclusion"]["contractive"] is False
    assert r["inclusion"]["violation"] == pytest.approx(-4 / 9)


def test_renorm_not_invariant(tmp_path):
    swap = [[0, 1], [1, 0]]
    doc = {"theta": {"ambient_dim": 2, "matrix": [[1, 0], [0, -1]]}, "H_plus": {"ambient_dim": 2, "span": [[1, 0.5]]},
           "U": swap}
    code, text = run(RunConfig("renorm", 1e-10, input_path=write(tmp_path, "r.json", doc)))
    assert code == 2 and json.loads(text)["error"] == "NotInvariant"


def test_markov_report(tmp_path):
    triple = {"H0": {"ambient_dim": 2, "span": []}, "H_plus": {"ambient_dim": 2, "span": [[1, 0]]},
              "H_minus": {"ambient_dim": 2, "span": [[1, 1]]}}
    path = write(tmp_path, "m.json", {"triple": triple})
    code, text = run(RunConfig("markov", 1e-10, seed=3, input_path=path))
    r = json.loads(text)["results"]
    assert code == 0
    assert r["markov"]["holds"] is False
    assert r["witness"]["status"] == "Found" and r["witness"]["violation"] < -1e-8
    code, text = run(RunConfig("markov", 1e-10, input_path=path))
    assert code == 2


def test_twoblock_report():
    code, text = run(RunConfig("twoblock", 1e-10, options={"c": "[[0.5]]", "markov_tol": 1e-10}))
    r = json.loads(text)["results"]
    assert code == 0 and r["markov"] is False
    assert r["markov_residual"] == pytest.approx(0.2)
    assert r["theta_in_R_epsilon"] is True
    code, text = run(RunConfig("twoblock", 1e-10, options={"c": "[[2.0]]"}))
    assert code == 2 and json.loads(text)["error"] == "NotContraction"


def test_covariance_report():
    opts = {"name": "ou", "grid": "0,1,2,3", "shift": 1.0, "semigroup_tol": 1e-12}
    code, text = run(RunConfig("covariance", 1e-10, options=opts))
    r = json.loads(text)["results"]
    assert code == 0 and r["semigroup"]["holds"]
    rs = r["reflected_semigroup"]
    assert rs["k_dim"] == 1 and rs["matrix"]["entries"][0][0][0] == pytest.approx(np.exp(-1), abs=1e-9)
    code, text = run(RunConfig("covariance", 1e-10, options={"name": "inv_linear", "grid": "0,1,2"}))
    assert code == 0 and json.loads(text)["results"]["semigroup"]["holds"] is False


def test_covariance_table(tmp_path):
    path = write(tmp_path, "t.json", {"samples": {"0": 1.0, "1": 0.5, "4": 0.1}})
    code, text = run(RunConfig("covariance", 1e-10, options={"table": path, "grid": "0,1"}))
    doc = json.loads(text)
    assert code == 0 and doc["results"]["approximate"] is True


def test_hs_report():
    code, text = run(RunConfig("hs", 1e-10, options={"s": 0.5, "a": 2.0, "n": 100, "k": 3}))
    r = json.loads(text)["results"]
    assert code == 0
    assert np.allclose(r["eigenvalues"], r["reference"], rtol=1e-6)
    assert np.allclose(r["ratios"], 0.25, atol=1e-3)


def test_hs_invalid():
    code, text = run(RunConfig("hs", 1e-10, options={"s": 1.5}))
    assert code == 2 and json.loads(text)["error"] == "InvalidS"


@pytest.mark.parametrize("content,err", [("", "SchemaError"), ("{bad", "ParseError"), ("{}", "SchemaError")])
def test_bad_inputs(tmp_path, content, err):
    code, text = run(RunConfig("geometry", 1e-10, input_path=write(tmp_path, "x.json", content)))
    assert code == 2 and json.loads(text)["error"] == err


def test_bad_tolerance():
    code, text = run(RunConfig("twoblock", -1.0, options={"c": "[[0.5]]"}))
    assert code == 2


def test_main_output_file(tmp_path, capsys):
    out = tmp_path / "out.json"
    assert main(["twoblock", "--c", "[[0.5]]", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["module"] == "two-block-model"


def test_main_schema(capsys):
    assert main(["--schema", "report"]) == 0
    assert "report" in json.loads(capsys.readouterr().out)


def test_env_tol(monkeypatch, capsys):
    monkeypatch.setenv("OSPOS_TOL", "-1")
    assert main(["twoblock", "--c", "[[0.5]]"]) == 2
    monkeypatch.setenv("OSPOS_TOL", "1e-8")
    assert main(["twoblock", "--c", "[[0.5]]"]) == 0
    assert json.loads(capsys.readouterr().out)["tolerances"]["tol"] == 1e-8


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "ospos.cli", "twoblock", "--c", "[[0]]"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["results"]["markov"] is True
