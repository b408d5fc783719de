import json

from fastapi.testclient import TestClient

from sheafdef.pipelines import run_examples
from sheafdef.service import create_app


def client():
    return TestClient(create_app())


def test_health():
    resp = client().get("/v1/health")
    assert resp.status_code == 200
    data = resp.json()
    assert data["status"] == "ok"
    assert "deform-sheaf" in data["commands"]


def test_examples_endpoint():
    c = client()
    listing = c.get("/v1/examples").json()
    assert "p1-tangent" in listing["examples"]
    doc = c.get("/v1/examples/p1-structure").json()
    assert "sites" in doc
    assert c.get("/v1/examples/nonsense").status_code == 404


def test_run_validate_endpoint():
    doc = json.loads(run_examples("p1-structure"))
    resp = client().post("/v1/run/validate", json={"document": doc})
    assert resp.status_code == 200
    data = resp.json()
    assert data["status"] == "ok"
    assert data["exit_code"] == 0
    assert data["schema"] == "sheafdef-report/1"


def test_run_accepts_document_text():
    text = run_examples("small-algebras")
    resp = client().post("/v1/run/oracle", json={
        "document": text, "options": {"algebra": "dual"}})
    assert resp.status_code == 200
    assert resp.json()["body"]["first_order_dimension"] == 1


def test_float_rejected_with_422():
    resp = client().post("/v1/run/validate", json={
        "document": '{"x": 1.5}'})
    assert resp.status_code == 422
    assert "line" in resp.json()["detail"]


def test_unknown_command_404():
    resp = client().post("/v1/run/frobnicate", json={"document": {}})
    assert resp.status_code == 404


def test_service_and_cli_reports_identical():
    import io
    import sys
    from sheafdef.cli import main

    doc_text = run_examples("p1-structure")
    resp = client().post("/v1/run/rgamma", json={
        "document": doc_text, "options": {"presheaf": "O"}})
    service_text = resp.json()["text"]

    stdin_backup = sys.stdin
    stdout_backup = sys.stdout
    try:
        sys.stdin = io.StringIO(doc_text)
        sys.stdout = io.StringIO()
        main(["rgamma", "--presheaf", "O", "--format", "text"])
        cli_text = sys.stdout.getvalue()
    finally:
        sys.stdin = stdin_backup
        sys.stdout = stdout_backup
    assert cli_text == service_text


def test_cap_errors_reported_with_exit_code_2():
    doc = json.loads(run_examples("p1-twist:-2"))
    resp = client().post("/v1/run/descent", json={
        "document": doc,
        "options": {"target": "T", "base": "k[t]/(t^2)", "max_cap": 0}})
    assert resp.status_code == 200
    data = resp.json()
    assert data["status"] == "cap"
    assert data["exit_code"] == 2
