import json
import subprocess
import sys

import numpy as np
import pytest

from lieper import __version__
from lieper.acceptance import random_su2_twisted_section
from lieper.cli import dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    data = json.loads(out)
    assert data["subcommand"] == argv[0] and data["version"] == __version__
    assert len(data["inputs_digest"]) == 64
    return data


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


@pytest.mark.parametrize("source", ["su2", "examples/su2.json"])
def test_vform_builtin_and_bundled(capsys, source):
    assert report(capsys, "vform", source, "--json")["outputs"]["quotient_dim"] == 1


def test_vform_from_file(capsys, tmp_path):
    # [a, b] = b: the non-abelian two-dimensional algebra, V = span of kappa(a, a)
    alg = {"dim": 2, "basis": ["a", "b"], "brackets": [[0, 1, [[1, "1"]]]]}
    path = write(tmp_path, "ab.json", alg)
    assert report(capsys, "vform", path)["outputs"]["quotient_dim"] == 1


def test_outputs_and_digest_are_deterministic(capsys):
    a = report(capsys, "vform", "gl2")
    b = report(capsys, "vform", "gl2")
    assert a["outputs"] == b["outputs"] and a["inputs_digest"] == b["inputs_digest"]
    c = report(capsys, "vform", "sl2")
    assert c["inputs_digest"] != a["inputs_digest"]


def test_malformed_and_missing_input(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", "{not json")
    code, out, err = run(capsys, "vform", bad)
    assert code == 2 and "malformed" in err and out == ""
    code, _, err = run(capsys, "coker", "--phi", str(tmp_path / "missing.json"))
    assert code == 2 and "cannot read" in err


def test_domain_error_reports_code(capsys, tmp_path):
    form = write(tmp_path, "k.json", [[1, 0, 0], [0, 2, 0], [0, 0, 3]])
    code, out, _ = run(capsys, "cocycle-check", "su2", "--kappa", form)
    assert code == 1
    assert json.loads(out)["error"]["code"] == "not_invariant"


def test_usage_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        dispatch(["period-s3", "--bogus"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "--res" in err and "--tol" in err


def test_cocycle_check(capsys):
    out = report(capsys, "cocycle-check", "su2", "--ad", "1,0,0")["outputs"]
    assert json.dumps(out)


def test_coker(capsys, tmp_path):
    phi = write(tmp_path, "phi.json", [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    out = report(capsys, "coker", "--phi", phi)["outputs"]
    assert out["dim"] == 1 and out["fixed_space_report"]["dim_fixed"] == 1
    unip = write(tmp_path, "u.json", {"matrix": [[1, 1], [0, 1]]})
    out = report(capsys, "coker", "--phi", unip, "--bound", "8")["outputs"]
    assert out["dim"] == 1
    assert "order_bound_exceeded" in json.dumps(out)


def test_loop_cocycle(capsys, tmp_path):
    rng = np.random.default_rng(5)
    t = np.linspace(0, 1, 129)
    samples = []
    for _ in range(3):
        phi, _, fn = random_su2_twisted_section(rng, 0)
        samples.append(fn(t).tolist())
    twist = write(tmp_path, "phi.json", [[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    secs = write(tmp_path, "s.json", {"N": 128, "samples": samples})
    out = report(capsys, "loop-cocycle", "su2", "--twist", twist, "--sections", secs)["outputs"]
    assert out["coker_dim"] == 1
    assert np.allclose(out["omega_phi"]["0,1"], -np.array(out["omega_phi"]["1,0"]), atol=1e-8)
    assert out["cocycle_residual"] < 1e-3
    bad = write(tmp_path, "b.json", {"N": 64, "samples": samples})
    assert run(capsys, "loop-cocycle", "su2", "--twist", twist, "--sections", bad)[0] == 2


def test_discrete(capsys, tmp_path):
    gens = write(tmp_path, "g.json", {"constants": ["1", "pi"], "vectors": [[[1, 0]], [[0, 1]]]})
    assert report(capsys, "discrete", "--generators", gens)["outputs"]["verdict"] == "not_discrete"
    out = report(capsys, "discrete", "--generators", gens, "--numeric",
                 "--values", "pi=3.141592653589793")["outputs"]
    assert out["verdict"] == "likely_not_discrete"
    rat = write(tmp_path, "r.json", {"vectors": [[[2]], [[3]]]})
    assert report(capsys, "discrete", "--generators", rat)["outputs"]["verdict"] == "discrete"


def test_torus(capsys):
    assert report(capsys, "torus-example", "--integral", "3/7")["outputs"]["verdict"] == "discrete"
    assert report(capsys, "torus-example")["outputs"]["verdict"] == "not_discrete"
    out = report(capsys, "torus-example", "--h", "s**2")["outputs"]
    assert out["verdict"] == "likely_discrete"


def test_holonomy(capsys):
    out = report(capsys, "holonomy", "--A", "xdy")["outputs"]
    assert json.dumps(out)
    assert run(capsys, "holonomy", "--A", "xdy", "--group", "su2")[0] == 2


def test_periods_small_grids(capsys):
    out = report(capsys, "period-s3", "--res", "8")["outputs"]
    assert abs(out["value"][0] - 8 * np.pi ** 2) / (8 * np.pi ** 2) < 0.05
    out = report(capsys, "period-loop", "--res", "8")["outputs"]
    assert abs(out["lhs"][0] - out["rhs"][0]) < 0.05 * abs(out["rhs"][0])


def test_reproduce_only(capsys):
    code, out, _ = run(capsys, "reproduce", "--only", "1", "cartan")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 3 and all(line.startswith("[PASS]") for line in lines[:2])
    assert lines[2] == "2/2 criteria passed"
    code, out, _ = run(capsys, "reproduce", "--only", "6", "--json")
    assert code == 0 and json.loads(out)["results"][0]["passed"]
    code, _, err = run(capsys, "reproduce", "--only", "nope")
    assert code == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "lieper.cli", "vform", "abelian3"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert json.loads(res.stdout)["outputs"]["quotient_dim"] == 6
