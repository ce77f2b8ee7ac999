import json

import numpy as np
import pytest

from src.orbit_hull.main import main, parse_config
from src.orbit_hull.schemas import SCHEMA, MatrixPayload


@pytest.fixture
def write_json(tmp_path):
    """Fixture providing a helper that stores a document in tmp_path and returns its path."""
    def write(name, document):
        path = tmp_path / name
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return str(path)

    return write


@pytest.fixture
def matrix_file(write_json):
    """Fixture providing a helper that stores a matrix in the wire format."""
    return lambda name, m: write_json(name, MatrixPayload.from_array(np.asarray(m)).model_dump())


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    document = json.loads(captured.out) if captured.out else None
    return code, document, captured


def test_member_exit_zero_with_witness(capsys, matrix_file):
    x = matrix_file("x.json", np.diag([1.5, 1.5]))
    y = matrix_file("y.json", np.diag([1.0, 2.0]))
    code, document, _ = run_cli(capsys, "member", "--x", x, "--y", y)
    assert code == 0
    assert document["schema"] == SCHEMA
    assert document["command"] == "member"
    assert document["verdict"] == "member"
    assert document["achieved"] <= document["tol"]
    assert "witness" in document


def test_member_exit_one_with_separator(capsys, matrix_file, roots_of_unity):
    x = matrix_file("x.json", np.diag([1, 1, -1, -1]))
    y = matrix_file("y.json", np.diag(roots_of_unity))
    code, document, _ = run_cli(capsys, "member", "--x", x, "--y", y)
    assert code == 1
    assert document["verdict"] == "non_member"
    assert document["separator"]["gap"] > 0


def test_malformed_json_names_the_location(capsys, write_json, matrix_file):
    broken = write_json("broken.json", '{"dim": 2,')
    y = matrix_file("y.json", np.eye(2))
    code, document, captured = run_cli(capsys, "member", "--x", broken, "--y", y)
    assert code == 2
    assert document is None, "nothing is written to stdout on failure"
    assert "broken.json:1:" in captured.err


def test_schema_violation_names_the_field(capsys, write_json, matrix_file):
    bad = write_json("bad.json", {"dim": 2, "entries": [[1, 0]]})
    y = matrix_file("y.json", np.eye(2))
    code, _, captured = run_cli(capsys, "member", "--x", bad, "--y", y)
    assert code == 2
    assert "bad.json" in captured.err


def test_missing_file(capsys, tmp_path, matrix_file):
    y = matrix_file("y.json", np.eye(2))
    code, _, captured = run_cli(capsys, "member", "--x", str(tmp_path / "nope.json"), "--y", y)
    assert code == 2
    assert "nope.json" in captured.err


def test_precondition_failure_exits_two(capsys, matrix_file):
    x = matrix_file("x.json", [[0, 1], [0, 0]])
    y = matrix_file("y.json", np.eye(2))
    code, _, captured = run_cli(capsys, "member", "--x", x, "--y", y)
    assert code == 2
    assert "PreconditionError" in captured.err


def test_reports_are_byte_identical_across_runs(capsys, matrix_file, conjugated):
    x = matrix_file("x.json", conjugated([0.5, 0.5, 2.0]))
    y = matrix_file("y.json", conjugated([0.0, 1.0, 2.0]))
    main(["member", "--x", x, "--y", y])
    first = capsys.readouterr().out
    main(["member", "--x", x, "--y", y])
    second = capsys.readouterr().out
    assert first == second


def test_verify_accepts_and_rejects(capsys, tmp_path, matrix_file, write_json):
    x = matrix_file("x.json", np.diag([1.5, 1.5]))
    y = matrix_file("y.json", np.diag([1.0, 2.0]))
    out = str(tmp_path / "report.json")
    assert main(["member", "--x", x, "--y", y, "--out", out]) == 0
    capsys.readouterr()

    code, document, _ = run_cli(capsys, "verify", "--report", out)
    assert code == 0
    assert document["valid"] is True

    tampered = json.loads(open(out).read())
    tampered["x"] = MatrixPayload.from_array(np.diag([5.0, 5.0])).model_dump()
    code, document, _ = run_cli(capsys, "verify", "--report", write_json("tampered.json", tampered))
    assert code == 1
    assert document["valid"] is False


def test_verify_rejects_non_member_reports(capsys, matrix_file, tmp_path, roots_of_unity):
    out = str(tmp_path / "report.json")
    x = matrix_file("x.json", np.diag([1, 1, -1, -1]))
    y = matrix_file("y.json", np.diag(roots_of_unity))
    assert main(["member", "--x", x, "--y", y, "--out", out]) == 1
    capsys.readouterr()
    code, _, _ = run_cli(capsys, "verify", "--report", out)
    assert code == 2


def test_check_normal(capsys, matrix_file):
    code, document, _ = run_cli(capsys, "check-normal", "--x", matrix_file("x.json", [[0, 1], [0, 0]]))
    assert code == 1
    assert document["defect"] == pytest.approx(1.0)


def test_birkhoff(capsys, write_json):
    d = write_json("d.json", {"n": 2, "d": [[0.75, 0.25], [0.25, 0.75]]})
    code, document, _ = run_cli(capsys, "birkhoff", "--d", d)
    assert code == 0
    assert document["terms"] == 2
    assert [term["perm"] for term in document["combination"]["terms"]] == [[1, 2], [2, 1]]


def test_transport_and_correct(capsys, write_json):
    code, document, _ = run_cli(capsys, "transport", "--input", write_json("t.json", {"a": [2, 1], "b": [1, 2]}))
    assert code == 0
    assert document["e"] == [[1.0, 1.0], [0.0, 1.0]]

    correct = write_json("c.json", {"d": [[0.6, 0.5], [0.4, 0.5]], "eps2": 0.1})
    code, document, _ = run_cli(capsys, "correct", "--input", correct)
    assert code == 0
    np.testing.assert_allclose(document["d_corrected"]["d"], np.array([[6, 5], [5, 6]]) / 11)


def test_average_and_absorb(capsys, write_json):
    one = {"dim": 1, "entries": [[1, 0]]}
    code, document, _ = run_cli(capsys, "average", "--input", write_json("a.json", {"part": 1, "a": one}), "--K", "4")
    assert code == 0
    assert document["achieved"] == pytest.approx(0.25)
    assert document["bound"] == pytest.approx(0.25)

    x1 = MatrixPayload.from_array(np.diag([1.0, 2.0])).model_dump()
    code, document, _ = run_cli(capsys, "absorb", "--input", write_json("b.json", {"x1": x1}))
    assert code == 0
    assert document["achieved"] == 0.0


def test_measures(capsys, write_json):
    document = {
        "X": {"support": [[-1, 0], [1, 0]], "weights": [0.5, 0.5]},
        "Y": {"support": [[0, 0]], "weights": [1.0]},
        "eps": 1e-9,
    }
    code, result, _ = run_cli(capsys, "measures", "--input", write_json("m.json", document))
    assert code == 0
    assert result["agree"] is True
    assert result["condition4"]["feasible"] is True


def test_suite_command(capsys):
    code, document, _ = run_cli(capsys, "suite", "--name", "birkhoff", "--count", "5", "--seed", "7")
    assert code == 0
    assert document["instances"] == 5
    assert document["failures"] == 0


def test_parse_config_collects_inputs():
    config = parse_config(["member", "--x", "a.json", "--y", "b.json", "--tol", "1e-6"])
    assert config.inputs == {"x": "a.json", "y": "b.json"}
    assert config.tol == 1e-6


def test_invalid_options(capsys):
    assert main(["member", "--x", "a.json", "--y", "b.json", "--tol", "0"]) == 2
    assert "tol" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["member", "--x", "a.json"])
