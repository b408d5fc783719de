"""FastAPI service wrapping the workbench: one endpoint per pipeline.

The CLI is a thin client over the same pipeline functions, so a document
posted here and the same document run locally produce byte-identical
reports.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .docio import DocumentError, WorkbenchDoc, parse_document_text
from .pipelines import (COMMANDS, EXAMPLES, Options, Report, example_document,
                        run_command)


class RunRequest(BaseModel):
    """A workbench document plus command options.

    ``document`` may be the parsed JSON object or the raw text; text goes
    through the exact-scalar scanner (floats rejected with line/column).
    """

    document: Any
    options: dict = Field(default_factory=dict)


class ReportModel(BaseModel):
    schema_name: str = Field(alias="schema")
    command: str
    status: str
    exit_code: int
    body: dict
    limitations: list[str]
    text: str

    model_config = {"populate_by_name": True}


def _to_model(report: Report) -> ReportModel:
    return ReportModel(
        schema="sheafdef-report/1",
        command=report.command,
        status=report.status,
        exit_code=report.exit_code,
        body=report.body,
        limitations=sorted(report.limitations),
        text=report.text(),
    )


def _load(request: RunRequest) -> WorkbenchDoc:
    if isinstance(request.document, str):
        raw = parse_document_text(request.document)
    elif isinstance(request.document, dict):
        raw = request.document
    else:
        raise DocumentError("document must be an object or its JSON text")
    return WorkbenchDoc(raw)


def create_app() -> FastAPI:
    app = FastAPI(title="sheafdef workbench",
                  description="Exact Cech cohomology, Maurer-Cartan and "
                              "Kuranishi computations on finite sites",
                  version=__version__)

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__,
                "commands": sorted(COMMANDS)}

    @app.get("/v1/examples")
    def list_examples() -> dict:
        return {"examples": sorted(EXAMPLES)}

    @app.get("/v1/examples/{name}")
    def get_example(name: str, window: int = 4) -> dict:
        try:
            return example_document(name, window=window)
        except DocumentError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/v1/run/{command}", response_model=ReportModel,
              response_model_by_alias=True)
    def run(command: str, request: RunRequest) -> ReportModel:
        if command not in COMMANDS:
            raise HTTPException(status_code=404,
                                detail=f"unknown command {command!r}")
        try:
            doc = _load(request)
        except DocumentError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        report = run_command(command, doc, Options.from_dict(request.options))
        return _to_model(report)

    return app


app = create_app()
