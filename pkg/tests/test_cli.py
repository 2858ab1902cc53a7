import json

from relviews.cli import main

FIX = "src/relviews/fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_lin_ok_exit_zero(capsys):
    code, out, _ = run(capsys, "check-lin", f"{FIX}/atomic-inc/model.json",
                       "--bound", "8")
    assert code == 0
    assert "no violation up to bound 8" in out


def test_check_lin_violation_exit_one(capsys):
    code, out, _ = run(capsys, "check-lin",
                       f"{FIX}/flat-combiner-nolock/model.json",
                       "--bound", "12")
    assert code == 1
    assert "t=1 call inc(1)" in out and "t=1 ret inc(0)" in out


def test_machine_format_agrees_with_text(capsys):
    code, out, _ = run(capsys, "check-lin",
                       f"{FIX}/flat-combiner-nolock/model.json",
                       "--bound", "12", "--format", "machine")
    assert code == 1
    doc = json.loads(out)
    assert doc["ok"] is False
    assert doc["counterexample"] == "t=1 call inc(1)\nt=1 ret inc(0)"
    assert doc["stats"]["concrete_histories"] > 0


def test_check_proof_accepts(capsys):
    code, out, _ = run(capsys, "check-proof", f"{FIX}/dcsl-cell/model.json",
                       f"{FIX}/dcsl-cell/outline.json")
    assert code == 0
    assert "proof accepted" in out


def test_check_proof_rejects_helping_in_dcsl(capsys):
    code, out, _ = run(capsys, "check-proof",
                       f"{FIX}/dcsl-helping/model.json",
                       f"{FIX}/dcsl-helping/outline.json")
    assert code == 1
    assert "initial coverage" in out
    assert "token composition" in out


def test_model_error_exit_two(capsys, tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text('{"name": "x"}')
    code, _, err = run(capsys, "check-lin", str(bad), "--bound", "2")
    assert code == 2
    assert "missing required section" in err


def test_dom_mismatch_exit_two(capsys, tmp_path):
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    del doc["abstract"]["inc"]
    doc["abstract"]["dec"] = {"guard": None, "updates": []}
    bad = tmp_path / "mismatch.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "check-lin", str(bad), "--bound", "2")
    assert code == 2
    assert "dom mismatch" in err


def test_histories_bound_zero_prints_epsilon(capsys):
    code, out, _ = run(capsys, "histories", f"{FIX}/atomic-inc/model.json",
                       "--bound", "0")
    assert code == 0
    assert "ε" in out
    assert "1 histories" in out


def test_histories_abstract_contains_pair(capsys):
    code, out, _ = run(capsys, "histories", f"{FIX}/atomic-inc/model.json",
                       "--side", "abstract", "--bound", "3")
    assert code == 0
    assert "t=1 call inc(1)" in out
    assert "t=1 ret inc(1)" in out


def test_cap_env_var_triggers_universe_error(capsys, monkeypatch):
    monkeypatch.setenv("RELVIEWS_CAP", "2")
    code, _, err = run(capsys, "histories",
                       f"{FIX}/flat-combiner/model.json", "--bound", "6")
    assert code == 2
    assert "cap" in err


def test_jobs_flag_same_verdict(capsys):
    code1, out1, _ = run(capsys, "check-proof",
                         f"{FIX}/atomic-inc/model.json",
                         f"{FIX}/atomic-inc/outline.json",
                         "--jobs", "1", "--format", "machine")
    code2, out2, _ = run(capsys, "check-proof",
                         f"{FIX}/atomic-inc/model.json",
                         f"{FIX}/atomic-inc/outline.json",
                         "--jobs", "4", "--format", "machine")
    assert code1 == code2 == 0
    assert json.loads(out1)["verdict"] == json.loads(out2)["verdict"]
