import json
import subprocess
import sys

import pytest

from sphlab.cli import EXIT_ERROR, EXIT_NOT_FOUND, EXIT_OK, compare, main, parse_param
from sphlab.config import RunConfig
from sphlab.errors import SphlabError
from sphlab.padic import PrimeContext


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_omega_trivial(capsys):
    code, doc = run(capsys, "omega", "--p", "2", "--n", "3", "--param", "trivial", "--coweight", "1,0,-1")
    assert code == EXIT_OK and doc["re"] == 1.0 and doc["im"] == 0.0


def test_cosets_count(capsys):
    code, doc = run(capsys, "cosets", "--p", "2", "--n", "2", "--coweight", "1,-1", "--oracle")
    assert doc["count"] == 6 and doc["oracle_count"] == 6


def test_param_equiv(capsys):
    code, doc = run(capsys, "param-equiv", "--n", "3", "--param", "s:1", "--param2", "s:2")
    assert doc["equivalent"] is False and doc["exact_path"] is True


def test_not_found_exit_code(capsys):
    code, doc = run(capsys, "unbounded", "--n", "2", "--sigma", "0", "--m-max", "3")
    assert code == EXIT_NOT_FOUND and doc["error"] == "not_found"
    assert len(doc["report"]["profile"]) == 3


def test_error_exit_codes(capsys):
    assert main(["omega", "--n", "3", "--param", "s:1"]) == EXIT_ERROR
    assert main(["cosets", "--p", "4", "--coweight", "1,-1"]) == EXIT_ERROR
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == EXIT_ERROR


@pytest.mark.parametrize(
    "argv",
    [
        ["cartan", "--n", "2", "--matrix", "2,1;0,1/2"],
        ["iwasawa", "--n", "3", "--matrix", "0,1,0;0,0,1;1,0,0"],
        ["structure-constants", "--n", "2", "--p", "3", "--m1", "1,-1", "--m2", "1,-1"],
        ["convolve", "--n", "2", "--f", "1,-1:1", "--g", "1,-1:1/2;0,0:1"],
        ["l1-norm", "--n", "2", "--f", "1,-1:1/2"],
        ["alpha", "--n", "3", "--param", "s:2", "--h", "1,0,-1"],
        ["tau", "--n", "3", "--param", "s:2", "--f", "1,0,-1:1"],
        ["satake", "--n", "2", "--f", "1,-1:1;0,0:3"],
        ["star-test", "--n", "3", "--param", "s:3"],
        ["gram", "--n", "3", "--param", "s:4", "--coweights", "0,0,0;1,0,-1;2,0,-2"],
        ["find-witness", "--n", "3", "--j-max", "4"],
        ["unbounded", "--n", "2", "--sigma", "1"],
        ["verify-axioms", "--n", "2", "--param", "sigma:1/3"],
        ["convergence-profile", "--n", "3", "--js", "1,8"],
    ],
)
def test_round_trip_through_verify(capsys, tmp_path, argv):
    out = tmp_path / "doc.json"
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    code, report = run(capsys, "verify", "--input", str(out))
    assert code == EXIT_OK, report
    assert report["ok"] and report["differences"] == []


def test_verify_detects_edits(capsys, tmp_path):
    out = tmp_path / "doc.json"
    main(["omega", "--n", "3", "--param", "s:1", "--coweight", "1,0,-1", "--out", str(out)])
    doc = json.loads(out.read_text())
    doc["re"] += 1e-3
    out.write_text(json.dumps(doc))
    code, report = run(capsys, "verify", "--input", str(out))
    assert code == EXIT_ERROR and report["differences"] == ["$.re"]


def test_payload_from_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps({"gram": [[1, 0], [0, -1]]})))
    code, doc = run(capsys, "psd", "--input", "-")
    assert doc["verdict"] == "NOT_PSD" and doc["witness"][1] == [1.0, 0.0]


def test_witness_deterministic_given_seed(capsys):
    _, a = run(capsys, "find-witness", "--n", "3", "--j-max", "3", "--seed", "7")
    _, b = run(capsys, "find-witness", "--n", "3", "--j-max", "3", "--seed", "7", "--threads", "3")
    assert a == b


def test_env_overrides(capsys, monkeypatch):
    monkeypatch.setenv("SPHLAB_N", "2")
    monkeypatch.setenv("SPHLAB_P", "3")
    code, doc = run(capsys, "cosets", "--coweight", "1,-1")
    assert doc["count"] == 12
    code, doc = run(capsys, "cosets", "--p", "2", "--coweight", "1,-1")
    assert doc["count"] == 6


def test_coset_cap_flag(capsys):
    assert main(["cosets", "--n", "2", "--coweight", "3,-3", "--coset-cap", "10"]) == EXIT_ERROR


def test_run_config_validation():
    with pytest.raises(SphlabError):
        RunConfig(p=9)
    with pytest.raises(SphlabError):
        RunConfig(tol=0)
    with pytest.raises(SphlabError):
        RunConfig(j_min=5, j_max=2)
    cfg = RunConfig.from_env({"SPHLAB_TOL": "1e-8", "SPHLAB_SEED": "3"}, seed=4)
    assert cfg.tol == 1e-8 and cfg.seed == 4


def test_parse_param_forms():
    ctx = PrimeContext(2, 3)
    a = parse_param(ctx, "1,0,-1;1,0,1")
    b = parse_param(ctx, "s:1")
    assert a == b
    assert parse_param(ctx, {"re": ["1/2", 0, 0], "im": [0, 0, 0]}).exact


def test_compare():
    assert compare({"a": 1.0, "b": [1, 2]}, {"a": 1.0 + 1e-12, "b": [1, 2]}) == []
    assert compare({"a": 1}, {"a": 2}) == ["$.a"]


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "sphlab.cli", "omega", "--n", "2", "--param", "trivial", "--coweight", "2,-2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["re"] == 1.0


def test_cap_flag_does_not_leak(capsys):
    from sphlab.cosets import DEFAULT_COSET_CAP, get_default_cap

    main(["cosets", "--n", "2", "--coweight", "1,-1", "--coset-cap", "7"])
    assert get_default_cap() == DEFAULT_COSET_CAP
