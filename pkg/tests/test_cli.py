import json
from pathlib import Path

import pytest

from qhl.cli import EXIT_DEPTH, EXIT_INVALID, EXIT_OK, EXIT_PARSE, EXIT_RUNTIME, SCHEMA_VERSION, main

SPECS = Path(__file__).resolve().parent.parent / "specs"
DEUTSCH = str(SPECS / "deutsch.qhl")
LOOPS = str(SPECS / "loops.qhl")


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_check_valid_triple(capsys):
    code, out = run_json(capsys, "check", DEUTSCH, "const0", "--suite-size", "10")
    assert code == EXIT_OK
    assert out["schema_version"] == SCHEMA_VERSION
    assert out["verdict"]["status"] == "VALID_ON_SUITE"
    assert {c["method"] for c in out["checks"]} == {"semantic", "wp"}


def test_check_invalid_triple_reports_counterexample(capsys):
    code, out = run_json(capsys, "check", DEUTSCH, "const0_wrong", "--suite-size", "5")
    assert code == EXIT_INVALID
    assert out["verdict"]["counterexample"]["index"] == 0


def test_check_text_output(capsys):
    assert main(["check", LOOPS, "coin_fair", "--suite-size", "5", "--method", "semantic"]) == EXIT_OK
    assert "triple coin_fair [prob]" in capsys.readouterr().out


def test_depth_bounded_exit(tmp_path, capsys):
    spec = tmp_path / "spin.qhl"
    spec.write_text("qubits 1\nvars X\nprogram spin { while true do skip }\n"
                    "triple t prob { P[ true ] = 1 } spin { P[ true ] = 0 }\n")
    code = main(["check", str(spec), "t", "--suite-size", "2", "--max-while-iters", "20",
                 "--depth-k", "4", "--depth-n", "4"])
    assert code == EXIT_DEPTH


def test_parse_error_exit(tmp_path, capsys):
    spec = tmp_path / "bad.qhl"
    spec.write_text("qubits 1\nprogram p { H[q1]; }\n")
    assert main(["run", str(spec), "p"]) == EXIT_PARSE
    err = capsys.readouterr().err
    assert "bad.qhl:2:" in err


def test_runtime_errors_exit(tmp_path, capsys):
    assert main(["run", DEUTSCH, "no_such_program"]) == EXIT_RUNTIME
    assert main(["run", str(tmp_path / "missing.qhl"), "p"]) == EXIT_RUNTIME
    spec = tmp_path / "unbound.qhl"
    spec.write_text("qubits 1\nvars X\nprogram p { X <- Z + 1 }\n")
    assert main(["run", str(spec), "p"]) == EXIT_RUNTIME


def test_run_prints_output_distribution(capsys):
    code, out = run_json(capsys, "run", DEUTSCH, "deutsch_id", "--state", "init")
    assert code == EXIT_OK
    assert out["mass"] == pytest.approx(1.0)
    assert [s["store"]["X"] for s in out["output"]["supports"]] == [1]


def test_run_loop_reports_iterations(capsys):
    code, out = run_json(capsys, "run", LOOPS, "countdown", "--state", "start3")
    assert code == EXIT_OK and out["iterations"] == 3 and out["residual_mass"] == 0


def test_wp_and_pt_commands(capsys):
    code, out = run_json(capsys, "wp", LOOPS, "coin", "Y = 1")
    # some branch of the coin leaves Y = 0
    assert code == EXIT_OK and out["result"] == "false"
    code, out = run_json(capsys, "pt", LOOPS, "coin", "P[ Y = 1 ]")
    assert code == EXIT_OK and out["result"] == "0.5 * P[ true ]" and out["labels"] == []
    code, out = run_json(capsys, "wp", LOOPS, "countdown", "X = 0", "--depth-k", "4")
    assert "depth-bounded" in out["labels"]


def test_prove_check(capsys):
    code, out = run_json(capsys, "prove-check", DEUTSCH, "deutsch_const0_proof", "--suite-size", "10")
    assert code == EXIT_OK and out["verdict"]["status"] == "VALID_ON_SUITE"


def test_prove_check_rule_mismatch(tmp_path, capsys):
    text = Path(DEUTSCH).read_text()
    good = "c1u: UNITARY { [H[q1]] [H[q1]] (P0(1) && P1(2)) } H[q1] { [H[q1]] (P0(1) && P1(2)) }"
    bad = "c1u: UNITARY { [H[q1]] (P0(1) && P1(2)) } H[q1] { [H[q1]] [H[q1]] (P0(1) && P1(2)) }"
    assert good in text
    spec = tmp_path / "mutated.qhl"
    spec.write_text(text.replace(good, bad))
    code, out = run_json(capsys, "prove-check", str(spec), "deutsch_const0_proof", "--suite-size", "5")
    assert code == EXIT_INVALID
    assert out["verdict"]["error"] == "rule-mismatch" and out["verdict"]["step"] == "c1u"


def test_json_is_reproducible_for_a_seed(capsys):
    argv = ["check", str(SPECS / "teleport.qhl"), "tele_zero", "--suite-size", "5", "--seed", "7", "--format", "json"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_divergent_run_is_flagged(tmp_path, capsys):
    spec = tmp_path / "spin.qhl"
    spec.write_text("qubits 1\nprogram spin { while true do skip }\n")
    code, out = run_json(capsys, "run", str(spec), "spin", "--max-while-iters", "30")
    assert code == EXIT_OK and out["residual_mass"] == 1.0 and out["labels"] == ["depth-bounded"]


def test_skip_wp_is_identity(tmp_path, capsys):
    spec = tmp_path / "skip.qhl"
    spec.write_text("qubits 1\nvars X\nprogram nop { skip }\n")
    code, out = run_json(capsys, "wp", str(spec), "nop", "X = 0 && [H[q1]] P0(1)")
    assert code == EXIT_OK and out["result"] == "X = 0 && [H[q1]] P0(1)"
