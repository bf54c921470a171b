"""HTTP facade over PipelineService.

Every endpoint is a thin adapter: it decodes the request, calls the same
module operation the CLI uses, and serializes the result. No metric, plan,
or prediction is computed in this layer.
"""

from __future__ import annotations

import os
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import guidance as guidance_mod
from .configuration import TrainingConfig
from .contract import validate_inputs
from .errors import (
    ConfigError,
    CsvError,
    InconsistentContextError,
    InvalidValueError,
    MissingInputError,
    NovapipeError,
    PreflightFailedError,
    SingleClassError,
    UnknownColumnError,
    UnknownDatasetError,
    UnknownInputError,
    UnknownJobError,
    UnknownMetricError,
    UnknownModelError,
)
from .evaluation import Diagnosis, EvaluationReport
from .service import PipelineService

DEFAULT_DATA_DIR = "novapipe-data"

_STATUS_BY_ERROR = {
    UnknownDatasetError: 404,
    UnknownJobError: 404,
    UnknownModelError: 404,
    UnknownColumnError: 404,
    ConfigError: 422,
    SingleClassError: 422,
    UnknownMetricError: 422,
    InvalidValueError: 422,
    InconsistentContextError: 422,
}


def data_dir_from_env() -> str:
    return os.environ.get("NOVAPIPE_DATA_DIR", DEFAULT_DATA_DIR)


def create_app(data_dir: Optional[str] = None, workers: int = 1) -> FastAPI:
    service = PipelineService(data_dir or data_dir_from_env(), workers=workers)
    app = FastAPI(title="novapipe", version="0.1.0")
    app.state.service = service

    @app.exception_handler(NovapipeError)
    async def handle_pipeline_error(request: Request, exc: NovapipeError):
        if isinstance(exc, PreflightFailedError):
            return JSONResponse(
                status_code=422,
                content={"issues": [i.to_dict() for i in exc.issues]},
            )
        if isinstance(exc, (MissingInputError, UnknownInputError)):
            return JSONResponse(
                status_code=422,
                content={"errors": [{"code": exc.code, "name": exc.name}]},
            )
        if isinstance(exc, CsvError):
            return JSONResponse(
                status_code=400,
                content={"error": exc.code, "detail": str(exc)},
            )
        status = _STATUS_BY_ERROR.get(type(exc), 500)
        return JSONResponse(
            status_code=status, content={"error": exc.code, "detail": str(exc)}
        )

    @app.post("/api/datasets")
    async def upload_dataset(request: Request):
        data = await request.body()
        dataset_id, report = service.upload_dataset(data)
        return {"dataset_id": dataset_id, "report": report.to_dict()}

    @app.get("/api/datasets/{dataset_id}/report")
    def dataset_report(dataset_id: str):
        return service.dataset_report(dataset_id).to_dict()

    @app.get("/api/datasets/{dataset_id}/preview")
    def dataset_preview(dataset_id: str):
        report = service.dataset_report(dataset_id)
        return {
            "columns": report.column_names,
            "rows": [list(r) for r in report.preview],
        }

    @app.get("/api/datasets/{dataset_id}/cascade-plan")
    def dataset_cascade_plan(dataset_id: str, target: str):
        return service.dataset_cascade_preview(dataset_id, target).to_dict()

    @app.post("/api/train")
    async def train(request: Request):
        body = await request.json()
        dataset_id = body["dataset_id"]
        config_dict = dict(body.get("config") or {})
        config_dict.setdefault("dataset_id", dataset_id)
        cfg = TrainingConfig.from_dict(config_dict)
        job_id = service.submit_training(dataset_id, cfg)
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def poll_job(job_id: str):
        return service.poll_job(job_id).to_dict()

    @app.get("/api/models/{model_id}/report")
    def model_report(model_id: str):
        return service.model_report(model_id)

    @app.get("/api/models/{model_id}/metadata")
    def model_metadata(model_id: str):
        return service.model_metadata(model_id).to_dict()

    @app.get("/api/models/{model_id}/cascade-plan")
    def model_cascade_plan(model_id: str):
        plan = service.model_cascade_plan(model_id)
        return plan.to_dict() if plan else None

    @app.post("/api/models/{model_id}/predict")
    async def predict(model_id: str, request: Request):
        body = await request.json()
        inputs = body.get("inputs") or {}
        _, metadata = service.load_model(model_id)
        errors = validate_inputs(metadata, inputs)
        if errors:
            return JSONResponse(status_code=422, content={"errors": errors})
        return service.predict(model_id, inputs).to_dict()

    @app.post("/api/guidance")
    async def guidance(request: Request):
        body = await request.json()
        ctx_dict = body.get("context") or {}
        payload = ctx_dict.get("payload") or {}

        evaluation = None
        if payload.get("evaluation"):
            evaluation = EvaluationReport.from_dict(payload["evaluation"])
        diagnoses = [
            Diagnosis(
                kind=d["kind"],
                severity=d.get("severity", "info"),
                subject=d.get("subject", ""),
                evidence=d.get("evidence", {}),
                explanation=d.get("explanation", ""),
            )
            for d in payload.get("diagnoses") or []
        ]
        ctx = guidance_mod.GuidanceContext(
            stage=ctx_dict.get("stage", ""),
            tier=ctx_dict.get("tier", "novice"),
            evaluation=evaluation,
            diagnoses=diagnoses,
        )

        messages = []
        metric = payload.get("metric")
        if metric:
            messages.append(guidance_mod.explain_metric(
                metric["name"], float(metric["value"]), ctx.tier,
            ))
        if evaluation is not None:
            messages.extend(guidance_mod.reliance_cues(evaluation))
        messages.append(guidance_mod.next_step(ctx))
        return [m.to_dict() for m in messages]

    return app


def run_server(port: Optional[int] = None, data_dir: Optional[str] = None,
               workers: int = 1):  # pragma: no cover - exercised manually
    import uvicorn

    port = port or int(os.environ.get("NOVAPIPE_PORT", "8000"))
    app = create_app(data_dir=data_dir, workers=workers)
    uvicorn.run(app, host="127.0.0.1", port=port)
