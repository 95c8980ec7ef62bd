import json

import pytest

from ieak.cli import BAD_INPUT, FAILED, OK, main
from ieak.io import data_path

MODEL = str(data_path("cards_model.json"))
ACTIONS = str(data_path("cards_actions.json"))
CHAIN3 = str(data_path("chain3_algebra.json"))
BROKEN = str(data_path("broken_frame.json"))
CHAIN2 = str(data_path("chain2_frame.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_parse_prints_canonical_form(capsys):
    code, out, _ = run(capsys, "parse", "p & q -> box a r")
    assert code == OK and out.strip() == "p & q -> box a r"
    code, d = run_json(capsys, "parse", "E p", "--agents", "a,b")
    assert code == OK and d["formula"] == "box a p & box b p"


def test_parse_error_reports_position(capsys):
    code, _, err = run(capsys, "parse", "p &")
    assert code == BAD_INPUT and "line 1, column 4" in err


def test_eval_relational(capsys):
    code, d = run_json(capsys, "eval", "<alpha> box b Ga", "--model", MODEL, "--actions", ACTIONS)
    assert code == OK and d["extension"] == ["state2"]
    code, out, _ = run(capsys, "eval", "Ga", "--model", MODEL, "--world", "state2")
    assert code == OK and out.strip() == "true"


def test_eval_unknown_action_is_bad_input(capsys):
    code, _, err = run(capsys, "eval", "<gamma> Ga", "--model", MODEL, "--actions", ACTIONS)
    assert code == BAD_INPUT and "gamma" in err


def test_missing_file_is_bad_input(capsys):
    code, _, _ = run(capsys, "eval", "p", "--model", "/nonexistent/model.json")
    assert code == BAD_INPUT


def test_eval_algebraic(capsys):
    code, d = run_json(capsys, "eval-alg", "p | ~p", "--algebra", CHAIN3, "--val", "p=m")
    assert code == OK and d["value"] == "m"
    code, d = run_json(capsys, "eval-alg", "p | ~p", "--algebra", CHAIN3, "--expect", "top")
    assert code == FAILED and d["countervaluation"] == {"p": "m"}
    code, d = run_json(capsys, "eval-alg", "~~(p | ~p)", "--algebra", CHAIN3, "--expect", "top")
    assert code == OK and d["valid"]


def test_update_chain(capsys):
    code, d = run_json(capsys, "update", "--model", MODEL, "--actions", ACTIONS, "--action", "alpha",
                       "--action", "beta")
    assert code == OK
    assert d["worlds"] == ["((state2,k),s)"]
    assert d["val"]["Ga"] == ["((state2,k),s)"]


def test_normalize_with_trace(capsys):
    code, d = run_json(capsys, "normalize", "<alpha> Ga", "--actions", ACTIONS, "--trace")
    assert code == OK and d["normal_form"] == "Ga & Ga"
    assert [s["axiom"] for s in d["trace"]] == ["dia-atom"]
    code, out, _ = run(capsys, "normalize", "[alpha][beta] box c Ga", "--actions", ACTIONS, "--max-steps", "1")
    assert code == FAILED and "within 1 steps" in out


def test_check_frame(capsys):
    code, out, _ = run(capsys, "check-frame", "--model", BROKEN)
    assert code == FAILED and "ik1" in out and "ik2" in out
    code, d = run_json(capsys, "check-frame", "--model", CHAIN2)
    assert code == OK and d["ok"]
    code, d = run_json(capsys, "check-frame", "--model", CHAIN2, "--mode", "mipc")
    assert code == FAILED


def test_check_algebra(capsys):
    code, d = run_json(capsys, "check-algebra", "--algebra", CHAIN3, "--mode", "mha")
    assert code == OK and d["ok"] and "FS1" in d["checked"]


def test_dualize_both_ways(capsys, tmp_path):
    out = tmp_path / "alg.json"
    code, _, _ = run(capsys, "dualize", CHAIN2, "-o", str(out))
    assert code == OK
    alg = json.loads(out.read_text())
    assert alg["elements"] == ["{}", "{x}", "{x,y}"]
    code, d = run_json(capsys, "dualize", str(out))
    assert code == OK and len(d["worlds"]) == 2


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export-dot", CHAIN2)
    assert code == OK and out.startswith("digraph") and 'label="a"' in out
    code, out, _ = run(capsys, "export-dot", CHAIN3)
    assert code == OK and "rankdir=BT" in out


def test_verify_small_suite(capsys):
    code, d = run_json(capsys, "verify", "agreement", "--samples", "10", "--max-worlds", "2")
    assert code == OK and d["passed"] and d["checked"] == 10


def test_verify_with_broken_fixture(capsys):
    code, d = run_json(capsys, "verify", "frames", "--max-worlds", "1", "--max-agents", "1", "--fixture", BROKEN)
    assert code == FAILED and not d["passed"]


def test_scenario_small(capsys):
    code, d = run_json(capsys, "scenario", "cards", "--max-worlds", "1", "--ik-samples", "5")
    assert code == OK and d["passed"] and d["ik_models"] == 5


def test_argparse_errors_exit_two(capsys):
    assert main(["verify", "nope"]) == BAD_INPUT
    assert main([]) == BAD_INPUT
    capsys.readouterr()


@pytest.mark.parametrize("argv", [["check-algebra", "--algebra", MODEL], ["dualize", "/nonexistent.json"]])
def test_wrong_inputs(capsys, argv):
    assert main(argv) == BAD_INPUT
    capsys.readouterr()
