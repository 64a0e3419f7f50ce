import json

import pytest

from tfmonad.main import run


def report_of(capsys):
    return json.loads(capsys.readouterr().out)


def test_verify_monad(capsys):
    assert run(["verify-monad", "--dims", "1", "--samples", "5"]) == 0
    report = report_of(capsys)
    assert report["passed"]
    assert report["config"]["command"] == "verify-monad"
    assert any(c["name"] == "mu = 1 tau_T + 1 T tau" and c["passed"] for c in report["checks"])


def test_check_algebra_example(capsys):
    assert run(["check-algebra", "--example", "semi-affine", "--samples", "6"]) == 0
    report = report_of(capsys)
    assert {"axiom 1: h(x, 0) = x", "A_x^2 = 0"} <= {c["name"] for c in report["checks"]}


def test_failing_algebra_exits_one(capsys):
    assert run(["check-algebra", "--example", "semi-affine-broken", "--samples", "6"]) == 1
    report = report_of(capsys)
    failed = [c for c in report["checks"] if not c["passed"]]
    assert failed[0]["name"] == "axiom 2: h o Th = h o mu"
    assert failed[0]["witness"]


def test_check_algebra_from_spec_file(write_json, capsys):
    path = write_json("affine.json", {
        "dim": 2, "exprs": ["x1 + v2", "x2"],
        "domain": {"min": ["-1", "-1"], "max": ["1", "1"]},
    })
    assert run(["check-algebra", path, "--samples", "6", "--nijenhuis"]) == 0
    assert report_of(capsys)["results"]["axioms"]["backend"] == "rational"


def test_malformed_expression_exits_two(write_json, capsys):
    path = write_json("bad.json", {
        "dim": 1, "exprs": ["x1 +"], "domain": {"min": ["-1"], "max": ["1"]},
    })
    assert run(["check-algebra", path]) == 2
    assert "position" in capsys.readouterr().err


def test_invalid_spec_shape_exits_two(write_json):
    path = write_json("short.json", {"dim": 2, "exprs": ["x1"], "domain": {"min": ["-1"], "max": ["1"]}})
    assert run(["check-algebra", path]) == 2


def test_missing_file_exits_two(tmp_path):
    assert run(["check-algebra", str(tmp_path / "absent.json")]) == 2


def test_rank1_example_runs_flow_checks(capsys):
    assert run(["check-algebra", "--example", "rotation", "--samples", "4", "--no-identities"]) == 0
    names = {c["name"] for c in report_of(capsys)["checks"]}
    assert {"alpha semibasic", "i_X alpha = 0", "L_X alpha = 0"} <= names


def test_report_written_to_output(tmp_path, capsys):
    target = tmp_path / "reports" / "free.json"
    assert run(["check-algebra", "--example", "free", "--samples", "4", "-o", str(target)]) == 0
    assert json.loads(target.read_text(encoding="utf-8")) == report_of(capsys)


def test_trace_leaf_exports(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "leaf.csv", tmp_path / "leaf.svg"
    code = run(["trace-leaf", "--example", "cylinder", "--count", "20",
                "--csv", str(csv_path), "--svg", str(svg_path)])
    assert code == 0
    assert report_of(capsys)["results"]["dimension"] == 1
    assert csv_path.read_text(encoding="utf-8").splitlines()[0] == "v1,v2,y1,y2"
    assert len(csv_path.read_text(encoding="utf-8").splitlines()) == 21
    assert "<svg" in svg_path.read_text(encoding="utf-8")


def test_lift_path_around_cylinder(capsys):
    assert run(["lift-path", "--example", "cylinder"]) == 0
    assert report_of(capsys)["passed"]


def test_lift_path_off_the_leaf_fails(capsys):
    assert run(["lift-path", "--example", "cylinder", "--path", "t", "1"]) == 1


def test_holonomy_of_cylinder(capsys):
    assert run(["holonomy", "--example", "cylinder"]) == 0
    assert report_of(capsys)["results"]["holonomy"]["has_eigenvalue_one"]


def test_hopf_laws(capsys):
    assert run(["hopf", "laws", "--a", "1", "--b", "2", "--samples", "5"]) == 0
    assert report_of(capsys)["results"]["antipode"]["title"] == "antipode t=-1/3"


def test_hopf_laws_without_antipode(capsys):
    assert run(["hopf", "laws", "--a=1", "--b=-1", "--samples", "5"]) == 0
    assert "1 + ab = 0" in report_of(capsys)["results"]["antipode"]


def test_hopf_classify(capsys):
    assert run(["hopf", "classify", "--a=1", "--b=-1", "--scan", "5"]) == 0
    families = report_of(capsys)["results"]["families"]
    assert [f["name"] for f in families] == ["zero", "scalar", "projection, lower", "projection, upper"]


def test_hopf_check_identifies_family(write_json, capsys):
    path = write_json("upper.json", {"a": 1, "b": -1, "A": [[1, 0], [0, 0]], "B": [[0, 1], [0, -1]], "X0": [1, -1]})
    assert run(["hopf", "check", path]) == 0
    assert report_of(capsys)["results"]["family"] == "projection, upper"


def test_hopf_check_rejects_irrational_entries(write_json):
    path = write_json("pi.json", {"a": "pi", "b": 0, "A": [[0, 1], [0, 0]], "B": [[0, 0], [1, 0]], "X0": [0, 0]})
    assert run(["hopf", "check", path]) == 2


def test_kahler_verify(capsys):
    assert run(["kahler", "verify", "--vars", "1", "--samples", "3"]) == 0
    assert report_of(capsys)["passed"]


@pytest.mark.parametrize("b, expected", [(2, 0), (3, 1)])
def test_kahler_coalgebra(write_json, b, expected):
    path = write_json("coalgebra.json", {"h": ["X1 + (1 + 2*X1)*dX1"], "b": b})
    assert run(["kahler", "coalgebra", path]) == expected


def test_examples(capsys):
    assert run(["examples", "--list"]) == 0
    assert "cylinder" in capsys.readouterr().out.split()
    assert run(["examples", "torus"]) == 0
    assert report_of(capsys)["periodic"] == ["2*pi", "2*pi"]


def test_example_spec_round_trips_through_check_algebra(tmp_path, capsys):
    target = tmp_path / "semi.json"
    assert run(["examples", "semi-affine", "-o", str(target)]) == 0
    capsys.readouterr()
    assert run(["check-algebra", str(target), "--samples", "4"]) == 0


def test_unknown_example_exits_two():
    assert run(["examples", "moebius"]) == 2


def test_radial_example_passes_check_algebra(tmp_path, capsys):
    target = tmp_path / "radial.json"
    assert run(["examples", "radial", "-o", str(target)]) == 0
    capsys.readouterr()
    assert run(["check-algebra", str(target), "--samples", "4"]) == 0
