import io
import json

import pytest

from sheafdef.cli import main
from sheafdef.docio import DocumentError, load_document, parse_document_text
from sheafdef.pipelines import Options, run_command, run_examples


def run_cli(capsys, monkeypatch, args, stdin_text=""):
    monkeypatch.setattr("sys.stdin", io.StringIO(stdin_text))
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_float_rejected_with_position():
    with pytest.raises(DocumentError) as err:
        parse_document_text('{\n  "x": 1.5\n}')
    assert "line 2" in str(err.value)


def test_exponent_float_rejected():
    with pytest.raises(DocumentError):
        parse_document_text('{"x": 1e3}')


def test_parse_error_has_position():
    with pytest.raises(DocumentError) as err:
        parse_document_text('{"x": }')
    assert "line 1" in str(err.value)


def test_unresolved_reference():
    with pytest.raises(DocumentError) as err:
        load_document('{"presheaves": {"M": {"site": "nope", "values": {}}}}')
    assert "unresolved" in str(err.value)


def test_examples_command(capsys, monkeypatch):
    code, out, _ = run_cli(capsys, monkeypatch, ["examples", "small-algebras"])
    assert code == 0
    doc = json.loads(out)
    assert set(doc["algebras"]) == {"k", "kxk", "dual", "x3", "m2"}


def test_validate_pipeline(capsys, monkeypatch):
    doc = run_examples("p1-structure")
    code, out, _ = run_cli(capsys, monkeypatch, ["validate"], stdin_text=doc)
    assert code == 0
    assert "validate: ok" in out


def test_malformed_document_exit_1(capsys, monkeypatch):
    code, out, err = run_cli(capsys, monkeypatch, ["validate"],
                             stdin_text='{"sites": ')
    assert code == 1
    assert "line" in err


def test_cech_numbers_via_cli(capsys, monkeypatch):
    doc = run_examples("p1-structure")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["cech", "--presheaf", "O", "--hypercover", "global",
                            "--mode", "alternating", "--format", "structured"],
                           stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["dims"] == {"0": 1}


def test_rgamma_independence_reported(capsys, monkeypatch):
    doc = run_examples("p1-structure")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["rgamma", "--presheaf", "O", "--format",
                            "structured"],
                           stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["independence_check"]["dims_agree"] is True


def test_deform_algebra_m2_rigid(capsys, monkeypatch):
    doc = run_examples("small-algebras")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["deform-algebra", "--algebra", "m2", "--base",
                            "k[t]/(t^3)", "--format", "structured"],
                           stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["rigid"] is True
    assert body["hochschild"] == {"0": 1, "1": 0, "2": 0}


def test_mc_and_gauge_via_cli(capsys, monkeypatch):
    doc = run_examples("mc-demo")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["mc", "--target", "heis", "--base", "k[t]/(t^3)",
                            "--element", "z", "--gauge", "gamma",
                            "--format", "structured"],
                           stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["is_mc"] is True
    assert body["gauge"]["path_is_mc"] is True
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["mc", "--target", "heis", "--base", "k[t]/(t^3)",
                            "--element", "bad", "--format", "structured"],
                           stdin_text=doc)
    body = json.loads(out)["body"]
    assert body["is_mc"] is False


def test_hypercheck_and_gac(capsys, monkeypatch):
    doc = run_examples("wuvp")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["hypercheck", "--hypercover", "cover",
                            "--format", "structured"], stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["validation"]["ok"] is True
    assert body["chains_vs_base_weak_equivalence"] is True
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["gac", "--hypercover", "cover", "--degree", "0",
                            "--format", "structured"], stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["K_generators"] == {"0": 1, "-1": 2, "-2": 1}
    assert body["checks"]["j_weak_equivalence"] is True


def test_equivariant_site_mode(capsys, monkeypatch):
    doc = run_examples("c2-p1")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["equivariant", "--mode", "site",
                            "--format", "structured"], stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["quotient_site"]["hom_counts"]["U01->U0"] == 2


def test_equivariant_algebra_mode(capsys, monkeypatch):
    doc = run_examples("c2-x3")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["equivariant", "--base", "k[t]/(t^2)",
                            "--format", "structured"], stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["report"]["forgetful"]["h1_equivariant"] == 1
    assert body["trivial_witness_invariant"] is True


def test_oracle(capsys, monkeypatch):
    doc = run_examples("small-algebras")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["oracle", "--algebra", "dual",
                            "--format", "structured"], stdin_text=doc)
    assert code == 0
    body = json.loads(out)["body"]
    assert body["first_order_dimension"] == 1
    assert body["matches_hochschild_h2"] is True


def test_descent_cap_exhaustion_exit_2(capsys, monkeypatch):
    doc = run_examples("p1-twist:-2")
    code, out, _ = run_cli(capsys, monkeypatch,
                           ["descent", "--target", "T", "--base", "k[t]/(t^2)",
                            "--max-cap", "0", "--format", "structured"],
                           stdin_text=doc)
    assert code == 2


def test_determinism_byte_identical(capsys, monkeypatch):
    doc = run_examples("p1-structure")
    outs = []
    for _ in range(2):
        code, out, _ = run_cli(capsys, monkeypatch,
                               ["rgamma", "--presheaf", "O",
                                "--format", "structured"], stdin_text=doc)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    outs_text = []
    for _ in range(2):
        _, out, _ = run_cli(capsys, monkeypatch,
                            ["validate"], stdin_text=doc)
        outs_text.append(out)
    assert outs_text[0] == outs_text[1]
