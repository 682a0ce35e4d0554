import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from omegaspace.cli import main, resolve_map, UsageError
from omegaspace.schauder import CoeffArray


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def coeffs(obj):
    return CoeffArray.from_json(obj).a


MOBIUS = json.dumps({"mobius": {"a": {"re": 1, "im": 0.1}, "b": {"re": 0.2, "im": 0}, "c": {"re": -0.1, "im": 0.05}, "d": {"re": 1, "im": 0}}, "swap": False})


# --- expand / eval / project / restrict ----------------------------------------------

def test_expand_exp_kernel(capsys):
    a = coeffs(run_json(capsys, "expand", "--input", "exp(z*w/(1-z*w))", "--order", "10"))
    expected = np.diag([1 / math.factorial(k) for k in range(11)])
    assert np.max(np.abs(a - expected)) < 1e-10


@pytest.mark.parametrize("src,p,q", [("1", 0, 0), ("f[2,1]", 2, 1)])
def test_expand_units(capsys, src, p, q):
    a = coeffs(run_json(capsys, "expand", "--input", src, "--order", "4"))
    unit = np.zeros((5, 5))
    unit[p, q] = 1
    assert np.max(np.abs(a - unit)) < 1e-10


def test_expand_writes_file_and_round_trips(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = run(capsys, "expand", "--input", "f[1,2] + 2*f[0,0]", "--order", "3", "--out", str(path))
    assert code == 0 and out == ""
    obj = json.loads(path.read_text())
    assert obj["basis"] == "schauder" and obj["N"] == 3
    assert json.loads(json.dumps(CoeffArray.from_json(obj).to_json())) == obj


def test_eval_coeffs_and_input_agree(capsys, tmp_path):
    path = tmp_path / "c.json"
    assert main(["expand", "--input", "exp(z*w/(1-z*w))", "--order", "16", "--out", str(path)]) == 0
    a = run_json(capsys, "eval", "--coeffs", str(path), "--point", "0.3, 0.2i")
    b = run_json(capsys, "eval", "--input", "exp(z*w/(1-z*w))", "--point", "0.3,0.2i")
    assert abs(complex(a["value"]["re"], a["value"]["im"]) - complex(b["value"]["re"], b["value"]["im"])) < 1e-10


def test_eval_at_infinity_uses_limit(capsys, tmp_path):
    path = tmp_path / "c.json"
    assert main(["expand", "--input", "f[1,1]", "--order", "2", "--out", str(path)]) == 0
    v = run_json(capsys, "eval", "--coeffs", str(path), "--point", "inf,inf")["value"]
    assert abs(v["re"] + 1) < 1e-10


def test_project(capsys, tmp_path):
    path = tmp_path / "c.json"
    assert main(["expand", "--input", "f[1,2] + f[2,1]", "--order", "3", "--out", str(path)]) == 0
    fut = coeffs(run_json(capsys, "project", "--coeffs", str(path), "--part", "future"))
    past = coeffs(run_json(capsys, "project", "--coeffs", str(path), "--part", "past"))
    assert abs(fut[2, 1] - 1) < 1e-10 and abs(fut[1, 2]) == 0
    assert abs(past[1, 2] - 1) < 1e-10 and abs(past[2, 1]) == 0


def test_restrict(capsys):
    obj = run_json(capsys, "restrict", "--input", "f[2,1]", "--r", "0.5", "--samples", "16")
    modes = dict(zip(obj["modes"], obj["coeffs"]))
    assert abs(modes[1][0] - 0.125 / 0.5625) < 1e-12
    assert max(abs(complex(*c)) for n, c in modes.items() if n < 0) < 1e-12


def test_laplacian(capsys):
    obj = run_json(capsys, "laplacian", "--input", "1/(1-z*w)", "--point", "0.2,0.1")
    z, w = 0.2, 0.1
    assert abs(obj["value"]["re"] - 4 * (1 + z * w) / (1 - z * w)) < 1e-10
    obj = run_json(capsys, "laplacian", "--input", "1/(z-w)", "--point", "2,0", "--model", "config")
    assert abs(obj["value"]["re"] - 4) < 1e-10


# --- invariance / metric ------------------------------------------------------------------

def test_invariance_check_mobius(capsys):
    obj = run_json(capsys, "invariance-check", "--map", MOBIUS)
    assert obj["verdict"] == "mobius" and obj["max_residual"] < 1e-7
    assert len(obj["per_function"]) == 25
    assert obj["detected"]["swap"] is False


def test_invariance_check_shear(capsys):
    obj = run_json(capsys, "invariance-check", "--map", "shear:g=id")
    assert obj["verdict"] == "not_mobius" and obj["detected"] is None
    obj = run_json(capsys, "invariance-check", "--map", "shear:g=id", "--model", "config")
    assert obj["verdict"] == "not_mobius"


def test_invariance_check_identity(capsys):
    obj = run_json(capsys, "invariance-check", "--map", "identity")
    assert obj["verdict"] == "mobius" and obj["max_residual"] < 1e-12


def test_invariance_check_composition_and_file(capsys, tmp_path):
    spec = {"compose": [json.loads(MOBIUS), {"mobius": json.loads(MOBIUS)["mobius"], "swap": True}]}
    path = tmp_path / "map.json"
    path.write_text(json.dumps(spec))
    obj = run_json(capsys, "invariance-check", "--map", str(path))
    assert obj["verdict"] == "mobius" and obj["detected"]["swap"] is True
    spec = {"compose": ["shear:g=id", "identity"]}
    assert run_json(capsys, "invariance-check", "--map", json.dumps(spec))["verdict"] == "not_mobius"


def test_invariance_check_config_mobius(capsys):
    obj = run_json(capsys, "invariance-check", "--map", MOBIUS, "--model", "config")
    assert obj["verdict"] == "mobius"


def test_invariance_check_perturbation(capsys):
    obj = run_json(capsys, "invariance-check", "--map", "perturb:seed=3,eps=0.1")
    assert obj["verdict"] == "not_mobius"


@pytest.mark.parametrize("spec", ["bogus", "shear:h=id", '{"mobius": {"a": 1}}', '{"compose": []}'])
def test_invalid_map_spec(capsys, spec):
    code, _, err = run(capsys, "invariance-check", "--map", spec)
    assert code == 2 and "error" in err


def test_degenerate_mobius_is_a_user_error(capsys):
    spec = {"mobius": {k: {"re": 1, "im": 0} for k in "abcd"}}
    code, _, _ = run(capsys, "invariance-check", "--map", json.dumps(spec))
    assert code == 2


def test_metric_check(capsys):
    obj = run_json(capsys, "metric-check", "--map", MOBIUS)
    assert obj["verdict"] == "isometry" and obj["max_deviation"] < 1e-7
    obj = run_json(capsys, "metric-check", "--map", "shear:g=id")
    assert obj["verdict"] == "not_isometry"


def test_resolve_map_shapes():
    assert resolve_map("identity").automorphism is not None
    assert resolve_map("shear:g=id").automorphism is None
    with pytest.raises(UsageError):
        resolve_map(42)


# --- transform ----------------------------------------------------------------------------

def test_transform_examples(capsys):
    obj = run_json(capsys, "transform", "--point", "0,0", "--from", "omega", "--to", "sphere")
    assert [c["re"] for c in obj["point"]] == [0, 0, -1] and obj["roundtrip_ok"]
    obj = run_json(capsys, "transform", "--point", "0,0", "--from", "omega", "--to", "config")
    assert obj["point"][0] == {"re": 0.0, "im": 0.0} and obj["point"][1] == "inf"
    obj = run_json(capsys, "transform", "--point", "0.3+0.1i,-0.2", "--from", "omega", "--to", "omega")
    assert obj["point"] == [{"re": 0.3, "im": 0.1}, {"re": -0.2, "im": 0.0}]


@pytest.mark.parametrize("src,dst", [("omega", "plus"), ("omega", "minus"), ("config", "sphere"), ("sphere", "config")])
def test_transform_round_trips(capsys, src, dst):
    point = "0.6,0,0.8" if src == "sphere" else "0.3+0.1i,-0.2"
    obj = run_json(capsys, "transform", "--point", point, "--from", src, "--to", dst)
    assert obj["roundtrip_ok"]


def test_transform_rejects_points_outside_source(capsys):
    assert run(capsys, "transform", "--point", "0.5,2", "--from", "omega", "--to", "sphere")[0] == 2
    assert run(capsys, "transform", "--point", "1,1", "--from", "config", "--to", "omega")[0] == 2
    assert run(capsys, "transform", "--point", "1,1,1", "--from", "sphere", "--to", "omega")[0] == 2
    assert run(capsys, "transform", "--point", "0.5", "--from", "omega", "--to", "config")[0] == 2
    assert run(capsys, "transform", "--point", "inf,1", "--from", "plus", "--to", "omega")[0] == 2


# --- convergence --------------------------------------------------------------------------

def table(out):
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["N", "max_error"]
    return [(int(n), float(e)) for n, e in rows[1:]]


def test_convergence_exp_kernel(capsys):
    code, out, _ = run(capsys, "convergence", "--input", "exp(z*w/(1-z*w))", "--orders", "2,4,8,12,16")
    assert code == 0
    rows = table(out)
    errs = [e for _, e in rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert rows[-1][1] < 1e-9


def test_convergence_finite_sums(capsys):
    _, out, _ = run(capsys, "convergence", "--input", "f[3,3]", "--orders", "3,5,8")
    assert all(e < 1e-12 for _, e in table(out))
    _, out, _ = run(capsys, "convergence", "--input", "2 - f[1,2] + 0.5i*f[2,0]", "--orders", "1,2,4")
    rows = table(out)
    assert rows[0][1] > 1e-3 and all(e < 1e-12 for n, e in rows if n >= 2)


def test_convergence_to_file(capsys, tmp_path):
    path = tmp_path / "t.csv"
    assert main(["convergence", "--input", "f[1,0]", "--orders", "1", "--out", str(path)]) == 0
    assert path.read_text().startswith("N,max_error")


def test_bad_orders(capsys):
    assert run(capsys, "convergence", "--input", "z", "--orders", "a,b")[0] == 2
    assert run(capsys, "convergence", "--input", "z", "--orders", "3,-1")[0] == 2


# --- contract ------------------------------------------------------------------------------

def test_parse_failure_exit_2(capsys):
    code, _, err = run(capsys, "expand", "--input", "z+", "--order", "3")
    assert code == 2 and "bad function spec" in err


def test_numerical_failure_exit_3(capsys):
    code, _, err = run(capsys, "laplacian", "--input", "1/(1-z*w)", "--point", "1,0.99999999999999")
    assert code == 3 and "singular" in err
    code, _, _ = run(capsys, "expand", "--input", "1/(z*0)", "--order", "2")
    assert code == 3


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["expand", "--input", "z", "--order", "3", "--bogus", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["transform", "--point", "0,0", "--from", "omega", "--to", "plane"])


def test_global_flags_accepted_everywhere(capsys):
    obj = run_json(capsys, "laplacian", "--input", "z*w", "--point", "0.1,0.1", "--samples", "16", "--radius", "0.1", "--singular-margin", "0.3", "--seed", "4")
    assert abs(obj["value"]["re"] - 4 * 0.99**2) < 1e-12


def test_tolerance_flag_changes_verdict(capsys):
    obj = run_json(capsys, "invariance-check", "--map", MOBIUS, "--tolerance", "1e-30")
    assert obj["verdict"] == "inconclusive"


def test_deterministic(capsys):
    a = run(capsys, "invariance-check", "--map", "perturb:seed=5")[1]
    b = run(capsys, "invariance-check", "--map", "perturb:seed=5")[1]
    assert a == b


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "omegaspace.cli", "transform", "--point", "inf,inf", "--from", "omega", "--to", "sphere"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert [c["re"] for c in json.loads(proc.stdout)["point"]] == [0, 0, 1]
