import json

import numpy as np
import pytest

from nclp.algebra import AlgebraDescriptor
from nclp.cli import EXIT_FAILED, EXIT_INPUT_ERROR, EXIT_PASSED, main
from nclp.codec import decode_triple, encode_superoperator, encode_yeadon, write_json
from nclp.isometry import LinearMap, YeadonTriple
from nclp.jordan import JordanMono


def test_ep_m2_prints_a_json_report(capsys):
    code = main(["ep-m2", "--p", "1", "--trials", "3"])
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert code == EXIT_PASSED
    assert report["schema"] == 1
    assert report["command"] == "ep-m2"
    assert report["passed"] is True
    witness = next(c for c in report["checks"] if c["name"] == "ep.witness")["witness"]
    assert witness["gap"] == pytest.approx(0.25, abs=1e-9)
    assert "ep.witness" in captured.err


def test_invalid_configuration_exits_with_two(capsys):
    assert main(["clarkson", "--p", "0.5"]) == EXIT_INPUT_ERROR
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False
    assert report["config"]["p"] == 0.5
    (check,) = report["checks"]
    assert check["name"] == "input"
    assert check["witness"]["error"] == "ConfigError"
    with pytest.raises(SystemExit):
        main(["sideways"])


def test_environment_is_validated(monkeypatch, capsys):
    monkeypatch.setenv("NCLP_TOL", "tight")
    assert main(["paving", "--trials", "1"]) == EXIT_INPUT_ERROR
    assert json.loads(capsys.readouterr().out)["checks"][0]["witness"]["error"] == "ConfigError"


def test_unknown_log_level_exits_with_two(capsys):
    assert main(["paving", "--trials", "1", "--log-level", "loud"]) == EXIT_INPUT_ERROR
    assert "log level" in json.loads(capsys.readouterr().out)["checks"][0]["witness"]["message"]


def test_tolerance_default_comes_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("NCLP_TOL", "1e-8")
    main(["paving", "--trials", "1"])
    assert json.loads(capsys.readouterr().out)["config"]["tol"] == 1e-8


def test_missing_input_exits_with_two(tmp_path, capsys):
    assert main(["decompose", "--in", str(tmp_path / "missing.json")]) == EXIT_INPUT_ERROR
    witness = json.loads(capsys.readouterr().out)["checks"][0]["witness"]
    assert witness["error"] == "CodecError"
    assert witness["path"] == "$"


def test_malformed_input_names_the_path(tmp_path, capsys):
    path = tmp_path / "map.json"
    path.write_text(json.dumps({"domain": {"dims": [2]}, "codomain": {"dims": [2]}, "p": 3.0, "matrix": [[[1, 0]]]}))
    assert main(["decompose", "--in", str(path)]) == EXIT_INPUT_ERROR
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "decompose"
    assert report["checks"][0]["witness"]["path"] == "$.matrix"


def test_full_suite_exit_code(capsys):
    assert main(["suite", "--p", "3", "--seed", "42", "--trials", "2"]) == EXIT_PASSED
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    commands = {c["name"].split(".")[0] for c in report["checks"]}
    assert commands >= {"clarkson", "decompose", "construct", "stormer", "factor", "modular", "hs", "ep", "paving"}


def test_decompose_identity_map(tmp_path, capsys):
    algebra = AlgebraDescriptor.of(2, 1)
    source = tmp_path / "identity.json"
    target = tmp_path / "triple.json"
    write_json(encode_superoperator(LinearMap(algebra, algebra, np.eye(algebra.dimension), p=3.0)), source)

    code = main(["decompose", "--in", str(source), "--out", str(target), "--trials", "10"])
    capsys.readouterr()
    assert code == EXIT_PASSED
    written = json.loads(target.read_text())
    y = decode_triple(written["yeadon"])
    assert y.w.distance(algebra.identity()) < 1e-10
    assert y.B.distance(algebra.identity()) < 1e-10
    assert np.abs(y.J.superoperator.matrix - np.eye(algebra.dimension)).max() < 1e-9
    assert written["typical"]["kind"] == "typical"


def test_construct_rejects_invalid_triple(tmp_path, capsys):
    algebra = AlgebraDescriptor.of(2)
    bad = YeadonTriple(algebra.identity() * 2, algebra.identity(), JordanMono.identity(algebra), 3.0)
    source = tmp_path / "bad.json"
    write_json(encode_yeadon(bad), source)

    code = main(["construct", "--in", str(source), "--trials", "5"])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_FAILED
    assert report["checks"][0]["witness"]["error"] == "InvalidTriple"
