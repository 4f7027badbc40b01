import io
import json
import shutil
import subprocess
import sys

import pytest

from pqc.cli import run_command


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("models")
    paths = {}
    for name, argv in {
        "h1": ("heisenberg", "--n", "1"),
        "h2": ("heisenberg", "--n", "2"),
        "l3": ("l0", "--c", "3"),
    }.items():
        p = d / f"{name}.json"
        assert run("builtin", *argv, "--out", str(p))[0] == 0
        paths[name] = p
    data = json.loads(paths["l3"].read_text())
    for entry in data["structure_constants"]:
        if entry[:3] == [2, 3, 4]:
            entry[3] = str(-int(entry[3]))
            break
    else:
        raise AssertionError("l0 bracket entry not found")
    bad = d / "bad.json"
    bad.write_text(json.dumps(data))
    paths["bad"] = bad
    return paths


def test_builtin_stdout_is_model():
    code, out, _ = run("builtin", "l0", "--c", "1/2")
    assert code == 0
    data = json.loads(out)
    assert data["format"] == "pqc-model" and data["n"] == 1


@pytest.mark.parametrize("cmd", ["validate", "reeb", "classify"])
@pytest.mark.parametrize("key", ["h1", "l3", "h2"])
def test_single_file_commands_pass(files, cmd, key):
    code, out, _ = run(cmd, str(files[key]))
    assert code == 0
    rep = json.loads(out)
    assert rep["command"] == cmd and rep["status"] == "pass"


def test_classify_label(files):
    rep = json.loads(run("classify", str(files["l3"]))[1])
    assert rep["label"] == "FlatHeisenberg"


def test_reeb_reports_fields(files):
    rep = json.loads(run("reeb", str(files["h1"]))[1])
    assert rep["xi"]["xi1"] == {"xi1": "1"}


@pytest.mark.parametrize("suite", ["all", "ricci", "bianchi", "structure", "forms"])
def test_verify_suites(files, suite):
    code, out, _ = run("verify", "--suite", suite, str(files["h1"]))
    assert code == 0
    assert json.loads(out)["status"] == "pass"


@pytest.mark.parametrize("cmd", ["validate", "classify", "verify"])
def test_corrupted_model_exits_1(files, cmd):
    code, out, _ = run(cmd, "--format", "text", str(files["bad"]))
    assert code == 1
    assert "FAIL jacobi" in out


def test_usage_errors(files, monkeypatch):
    assert run("verify", "--suite", "nope", str(files["h1"]))[0] == 2
    assert run("builtin", "heisenberg", "--n", "0")[0] == 2
    assert run("gauge", str(files["h1"]))[0] == 2
    monkeypatch.setenv("PQC_THREADS", "0")
    code, _, err = run("verify", str(files["h1"]))
    assert code == 2 and "PQC_THREADS" in err


def test_bad_files(tmp_path):
    assert run("validate", str(tmp_path / "missing.json"))[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert run("validate", str(junk))[0] == 2


def test_gauge_with_jacobi_failure_is_invalid_input(files):
    code, _, err = run("gauge", "--seed", "1", str(files["bad"]))
    assert code == 2 and "invalid input" in err


def test_gauge_round_trip(files, tmp_path):
    out_path = tmp_path / "g.json"
    assert run("gauge", "--seed", "4", "--rescale", "2", str(files["l3"]), "--out", str(out_path))[0] == 0
    code, out, _ = run("classify", str(out_path))
    assert code == 0 and json.loads(out)["label"] == "FlatHeisenberg"


@pytest.mark.parametrize("argv", [("verify", "{h1}"), ("classify", "{l3}"), ("gauge", "--seed", "9", "{h2}"), ("formal-sasakian",)])
def test_deterministic_output(files, argv):
    argv = [a.format(**{k: str(v) for k, v in files.items()}) for a in argv]
    first = run(*argv)
    second = run(*argv)
    assert first == second
    assert run(*argv, "--format", "text") == run(*argv, "--format", "text")


def test_text_json_parity(files):
    rep = json.loads(run("verify", str(files["h1"]))[1])
    text = run("verify", "--format", "text", str(files["h1"]))[1]
    for suite in rep["suites"]:
        assert f"[{suite['suite']}] {suite['status'].upper()}" in text
        for e in suite["entries"]:
            assert f"{e['status'].upper()} {e['id']}:" in text


def test_formal_sasakian():
    code, out, _ = run("formal-sasakian")
    assert code == 0 and json.loads(out)["status"] == "pass"


def test_parallel_matches_serial(files, monkeypatch):
    paths = [str(files[k]) for k in ("h1", "l3", "bad")]
    serial = run("verify", *paths)
    monkeypatch.setenv("PQC_THREADS", "3")
    parallel = run("verify", *paths)
    assert serial == parallel and serial[0] == 1


def test_console_script(files):
    exe = shutil.which("pqc")
    cmd = [exe] if exe else [sys.executable, "-m", "pqc.cli"]
    proc = subprocess.run([*cmd, "classify", str(files["h1"])], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["label"] == "FlatHeisenberg"
    proc = subprocess.run([*cmd, "validate"], capture_output=True, text=True)
    assert proc.returncode == 2
