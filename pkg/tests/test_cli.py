import io
import json
from contextlib import redirect_stderr, redirect_stdout

import pytest

from pontcalc import cli


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def circle_input(tmp_path):
    p = tmp_path / "circle.json"
    p.write_text(json.dumps({"model": "circle", "vertices": 4}))
    return p


@pytest.fixture
def torus_input(tmp_path):
    p = tmp_path / "torus.json"
    p.write_text(json.dumps({"model": "torus", "grid": [3, 3]}))
    return p


def test_pipeline_on_the_circle(circle_input):
    code, out, err = run_cli("pipeline", circle_input)
    assert code == 0
    bundle = json.loads(out)
    assert bundle["fix"]["status"] == "found"
    assert bundle["pont"]["duals"][0]["homologous_to_fundamental_class"]
    assert err.strip()


def test_output_is_byte_identical(torus_input, tmp_path):
    runs = []
    for k in range(2):
        d = tmp_path / f"out{k}"
        code, out, _ = run_cli("pipeline", torus_input, "--flavor", "linear", "--out", d)
        assert code == 0
        files = sorted(p.relative_to(d) for p in d.rglob("*") if p.is_file())
        runs.append((out, {f: (d / f).read_bytes() for f in files}))
    assert runs[0] == runs[1]
    names = {str(f) for f in runs[0][1]}
    assert {"bundle.json", "summary.txt", "omega.json"} <= names
    assert any(n.startswith("figures/") and n.endswith(".png") for n in names)


@pytest.mark.parametrize("command", ["charts", "assoc", "chern"])
def test_partial_commands(command, circle_input):
    code, out, _ = run_cli(command, circle_input)
    assert code == 0 and "charts" in json.loads(out)


@pytest.mark.parametrize(
    "argv",
    [
        ["pipeline", "/nonexistent.json"],
        ["bogus"],
        [],
        ["charts", "{path}", "--refine-cap", "0"],
        ["charts", "{path}", "--flavor", "projective"],
    ],
)
def test_input_errors_exit_two(argv, circle_input):
    code, out, _ = run_cli(*[a.format(path=circle_input) for a in argv])
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "input"


def test_malformed_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    for body in ["{not json", json.dumps({"model": "sphere"}), json.dumps({"model": "torus", "grid": [2, 2]})]:
        bad.write_text(body)
        code, out, _ = run_cli("charts", bad)
        assert code == 2 and "error" in json.loads(out)


def test_linear_flavor_needs_dimension_two(circle_input):
    code, out, _ = run_cli("charts", circle_input, "--flavor", "linear")
    assert code == 2


def test_thread_variable_is_validated(circle_input, monkeypatch):
    monkeypatch.setenv("PONTCALC_THREADS", "many")
    assert run_cli("charts", circle_input)[0] == 2
    monkeypatch.setenv("PONTCALC_THREADS", "2")
    assert run_cli("charts", circle_input)[0] == 0


def test_cp2_needs_the_stretch_flag(tmp_path):
    p = tmp_path / "cp2.json"
    p.write_text(json.dumps({"model": "cp2_9"}))
    code, out, _ = run_cli("pipeline", p)
    assert code == 1 and json.loads(out)["error"]["kind"] == "resource"
    code, out, _ = run_cli("pipeline", p, "--stretch")
    assert code == 0 and json.loads(out)["stretch"]["status"] == "inconclusive"


def test_verify_suites():
    code, out, _ = run_cli("verify", "--samples", "1")
    assert code == 0
    suites = json.loads(out)["verify"]
    assert set(suites) == {"grassmann", "charts", "om_kernel", "quasifibration"}
    assert all(s["ok"] for s in suites.values())
    grassmann = suites["grassmann"]
    assert grassmann["diagonal_certificate"] == "35/6"
    assert grassmann["permutation_det"] == grassmann["transvection_det"] == "1/1"


def test_verify_omega_round_trip(torus_input, tmp_path):
    d = tmp_path / "out"
    assert run_cli("chern", torus_input, "--flavor", "linear", "--out", d)[0] == 0
    omega = d / "omega.json"
    code, out, _ = run_cli("verify", torus_input, "--flavor", "linear", "--samples", "1", "--omega", omega)
    assert code == 0 and json.loads(out)["verify"]["omega_file"]["delta_zero"]
    # a coefficient on a simplex outside the complex is an input error
    obj = json.loads(omega.read_text())
    obj["coefficients"].append([[["nowhere"], ["nowhere"], ["nowhere"]], "1/1"])
    omega.write_text(json.dumps(obj))
    code, out, _ = run_cli("verify", torus_input, "--flavor", "linear", "--samples", "1", "--omega", omega)
    assert code == 2
    obj["degree"], obj["coefficients"] = 1, []
    omega.write_text(json.dumps(obj))
    code, out, _ = run_cli("verify", torus_input, "--flavor", "linear", "--samples", "1", "--omega", omega)
    assert code == 1 and not json.loads(out)["partial"]["verify"]["omega_file"]["ok"]
