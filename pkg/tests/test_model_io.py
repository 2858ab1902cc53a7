import json

import pytest

from relviews.errors import ModelError
from relviews.fixtures import fixture_manifest
from relviews.model_io import (
    attach_outlines,
    dump_command,
    load_model,
    parse_command,
    parse_expr,
    parse_model,
    parse_vassn,
    serialize_model,
    MacroTable,
)

FIX = "src/relviews/fixtures"


def test_round_trip_all_fixtures():
    for fx in fixture_manifest():
        model = load_model(fx.model_path)
        doc1 = serialize_model(model)
        model2 = parse_model(json.loads(json.dumps(doc1)))
        doc2 = serialize_model(model2)
        assert doc1 == doc2, fx.name


def test_while_loads_as_its_encoding():
    cmd = parse_command(["while", ["read", "l"], ["store", "l", 0]])
    dumped = dump_command(cmd)
    assert "while" not in json.dumps(dumped)
    assert parse_command(dumped) == cmd


def test_if_loads_as_its_encoding():
    cmd = parse_command(["if", ["read", "l"], ["store", "l", 0], ["skip"]])
    dumped = dump_command(cmd)
    assert "choice" in json.dumps(dumped)
    assert parse_command(dumped) == cmd


def test_bad_json_reports_line_and_column():
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".json",
                                     delete=False) as fh:
        fh.write('{"name": \n "oops", }')
        path = fh.name
    with pytest.raises(ModelError, match="line"):
        load_model(path)


def test_missing_sections_rejected():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    del doc["abstract"]
    with pytest.raises(ModelError, match="abstract"):
        parse_model(doc)


def test_unknown_expression_form():
    with pytest.raises(ModelError):
        parse_expr(["frobnicate", 1, 2])


def test_macro_recursion_rejected():
    macros = MacroTable({
        "a": {"params": [], "body": ["macro", "b"]},
        "b": {"params": [], "body": ["macro", "a"]},
    })
    with pytest.raises(ModelError, match="recursive"):
        parse_vassn(["macro", "a"], macros, 2)


def test_macro_arity_checked():
    macros = MacroTable({"a": {"params": ["x"], "body": ["emp"]}})
    with pytest.raises(ModelError, match="expects"):
        parse_vassn(["macro", "a"], macros, 2)


def test_nested_box_rejected():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    doc["assertions"]["inc"]["pre"] = ["box", ["box", ["emp"]]]
    with pytest.raises(ModelError, match="nested"):
        parse_model(doc)


def test_true_outside_box_rejected():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    doc["assertions"]["inc"]["pre"] = ["star", ["true"], ["emp"]]
    with pytest.raises(ModelError, match="true"):
        parse_model(doc)


def test_undeclared_primitive_in_body():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    doc["methods"]["inc"]["body"] = ["prim", "mystery"]
    with pytest.raises(ModelError, match="mystery"):
        parse_model(doc)


def test_outline_for_unknown_method_rejected():
    model = load_model(f"{FIX}/atomic-inc/model.json")
    with pytest.raises(ModelError, match="unknown method"):
        attach_outlines({"outlines": {"dec": {"kind": "skip"}}}, model)


def test_outline_must_cover_all_methods():
    model = load_model(f"{FIX}/flat-combiner/model.json")
    doc = json.load(open(f"{FIX}/flat-combiner/outline.json"))
    del doc["outlines"]["get"]
    with pytest.raises(ModelError, match="missing"):
        attach_outlines(doc, model)


def test_seq_outline_alternation_enforced():
    model = load_model(f"{FIX}/atomic-inc/model.json")
    bad = {"outlines": {"inc": {"kind": "seq", "steps": [
        {"kind": "skip"}, {"kind": "skip"}]}}}
    with pytest.raises(ModelError, match="alternate"):
        attach_outlines(bad, model)


def test_inc_body_uses_expected_locations():
    model = load_model(f"{FIX}/flat-combiner/model.json")
    body = model.body("inc", 1, 0)
    names = json.dumps(dump_command(body))
    assert "res[{t}]" in names and "publish" in names


def test_cas_loads_as_success_failure_choice():
    cmd = parse_command(["cas", "L", 0, 1, ["skip"], ["skip"]])
    dumped = json.dumps(dump_command(cmd))
    assert "cas_succ" in dumped and "cas_fail" in dumped
    assert "choice" in dumped
    assert parse_command(dump_command(cmd)) == cmd
