import hashlib
import threading
import time

import pytest
from fastapi.testclient import TestClient

from novapipe import contract
from novapipe.configuration import TrainingConfig
from novapipe.data_intake import parse_csv, profile_dataset
from novapipe.errors import PreflightFailedError, UnknownJobError
from novapipe.server import create_app
from novapipe.service import JobManager, PipelineService
from novapipe.training import one_click_train
from synthdata import binary_news_csv, four_class_csv

FAST_HP = {"hash_dimensions": 1024}


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data")
    with TestClient(app) as c:
        yield c


def _upload(client, payload: bytes) -> dict:
    response = client.post("/api/datasets", content=payload)
    assert response.status_code == 200, response.text
    return response.json()


def _train(client, dataset_id: str, **config) -> str:
    config.setdefault("input_columns", ["title", "body"])
    config.setdefault("target_column", "label")
    config.setdefault("hyperparameters", FAST_HP)
    response = client.post("/api/train", json={"dataset_id": dataset_id, "config": config})
    assert response.status_code == 200, response.text
    return response.json()["job_id"]


def _wait(client, job_id: str, timeout=120.0) -> dict:
    deadline = time.monotonic() + timeout
    states = []
    while time.monotonic() < deadline:
        job = client.get(f"/api/jobs/{job_id}").json()
        if not states or states[-1] != job["state"]:
            states.append(job["state"])
        if job["state"] in ("done", "failed"):
            return job, states
        time.sleep(0.02)
    raise TimeoutError(job_id)


# --- jobs ----------------------------------------------------------------------

def test_job_manager_serializes_work_with_one_worker():
    manager = JobManager(workers=1)
    release = threading.Event()
    started = threading.Event()

    def slow(_progress):
        started.set()
        assert release.wait(timeout=30)
        return "first"

    def quick(_progress):
        return "second"

    job1 = manager.submit(slow)
    job2 = manager.submit(quick)
    assert started.wait(timeout=30)
    assert manager.get(job1).state == "running"
    assert manager.get(job2).state == "queued"  # held back by the busy worker
    release.set()
    assert manager.wait(job1).result == "first"
    assert manager.wait(job2).result == "second"


def test_job_failure_records_error():
    manager = JobManager(workers=1)

    def boom(_progress):
        raise RuntimeError("synthetic failure")

    snap = manager.wait(manager.submit(boom))
    assert snap.state == "failed"
    assert "synthetic failure" in snap.error
    assert snap.result is None


def test_divergent_training_job_fails_with_message(tmp_path):
    service = PipelineService(tmp_path / "data")
    dataset_id, _ = service.upload_dataset(binary_news_csv(rows=120))
    cfg = TrainingConfig(
        dataset_id=dataset_id, input_columns=["title", "body"],
        target_column="label",
        hyperparameters={**FAST_HP, "learning_rate": 1e6},
    )
    snap = service.train_sync(dataset_id, cfg)
    assert snap.state == "failed"
    assert snap.error and "NonFiniteLoss" in snap.error
    assert snap.result is None


def test_unknown_job():
    manager = JobManager(workers=1)
    with pytest.raises(UnknownJobError):
        manager.get("job-nope")


# --- datasets ----------------------------------------------------------------------

def test_upload_and_report_roundtrip(client):
    raw = binary_news_csv(rows=60)
    body = _upload(client, raw)
    assert body["dataset_id"] == hashlib.sha256(raw).hexdigest()
    report = client.get(f"/api/datasets/{body['dataset_id']}/report").json()
    assert report == body["report"]
    preview = client.get(f"/api/datasets/{body['dataset_id']}/preview").json()
    assert preview["columns"] == ["title", "body", "label"]
    assert len(preview["rows"]) == 10


def test_upload_parse_error_is_400_with_code(client):
    response = client.post("/api/datasets", content=b"a,a\n1,2\n")
    assert response.status_code == 400
    assert response.json()["error"] == "DuplicateColumn"


def test_upload_is_idempotent(client):
    raw = binary_news_csv(rows=60)
    first = _upload(client, raw)
    second = _upload(client, raw)
    assert first == second


def test_unknown_dataset_404(client):
    assert client.get("/api/datasets/feed/report").status_code == 404


def test_dataset_cascade_plan_preview(client):
    body = _upload(client, four_class_csv())
    response = client.get(
        f"/api/datasets/{body['dataset_id']}/cascade-plan", params={"target": "category"}
    )
    plan = response.json()
    assert plan["ordered_classes"] == ["news", "sports", "tech", "travel"]
    assert len(plan["stages"]) == 3


# --- training over HTTP ------------------------------------------------------------

def test_train_job_lifecycle_and_model_endpoints(client):
    body = _upload(client, binary_news_csv(rows=80))
    job_id = _train(client, body["dataset_id"])
    job, states = _wait(client, job_id)
    assert job["state"] == "done"
    assert job["error"] is None
    model_id = job["result"]
    assert model_id
    # no backward transitions ever observed
    order = {"queued": 0, "running": 1, "done": 2, "failed": 2}
    ranks = [order[s] for s in states]
    assert ranks == sorted(ranks)

    report = client.get(f"/api/models/{model_id}/report").json()
    assert report["accuracy"] >= 0.9
    metadata = client.get(f"/api/models/{model_id}/metadata").json()
    assert metadata["model_id"] == model_id
    assert [e["name"] for e in metadata["input_schema"]] == ["title", "body"]
    assert client.get(f"/api/models/{model_id}/cascade-plan").json() is None


def test_train_preflight_rejection_is_422_with_issues(client):
    body = _upload(client, binary_news_csv(rows=60))
    response = client.post("/api/train", json={
        "dataset_id": body["dataset_id"],
        "config": {"input_columns": ["title"], "target_column": "ghost"},
    })
    assert response.status_code == 422
    issues = response.json()["issues"]
    assert any(i["code"] == "TargetMissing" for i in issues)


def test_job_progress_monotone_while_polling(client):
    body = _upload(client, binary_news_csv(rows=200))
    job_id = _train(client, body["dataset_id"])
    seen = []
    while True:
        job = client.get(f"/api/jobs/{job_id}").json()
        seen.append(job["progress"]["fraction_done"])
        if job["state"] in ("done", "failed"):
            break
        time.sleep(0.01)
    assert seen == sorted(seen)
    assert job["state"] == "done"


def test_unknown_job_404(client):
    assert client.get("/api/jobs/job-missing").status_code == 404


# --- predict over HTTP ---------------------------------------------------------------

def _trained_model_id(client, raw):
    body = _upload(client, raw)
    job_id = _train(client, body["dataset_id"])
    job, _ = _wait(client, job_id)
    assert job["state"] == "done"
    return body["dataset_id"], job["result"]


def test_predict_endpoint_and_validation(client):
    _, model_id = _trained_model_id(client, binary_news_csv(rows=80))
    good = client.post(f"/api/models/{model_id}/predict",
                       json={"inputs": {"title": "real00 real01", "body": "real02"}})
    assert good.status_code == 200
    prediction = good.json()
    assert prediction["label"] in ("real", "fake")
    assert abs(sum(prediction["distribution"].values()) - 1.0) < 1e-9

    bad = client.post(f"/api/models/{model_id}/predict",
                      json={"inputs": {"title": "x", "surprise": "y"}})
    assert bad.status_code == 422
    assert bad.json()["errors"] == [
        {"code": "MissingInput", "name": "body"},
        {"code": "UnknownInput", "name": "surprise"},
    ]


# --- API equivalence -------------------------------------------------------------------

def test_api_equivalence_upload_train_predict(client, tmp_path):
    raw = binary_news_csv(rows=80)

    # upload: endpoint payload equals the direct module result
    body = _upload(client, raw)
    dataset = parse_csv(raw)
    dataset_id = hashlib.sha256(raw).hexdigest()
    direct_report = profile_dataset(dataset, dataset_id=dataset_id)
    assert body == {"dataset_id": dataset_id, "report": direct_report.to_dict()}

    # train: the job's model and report equal a direct one_click_train run
    job_id = _train(client, dataset_id)
    job, _ = _wait(client, job_id)
    model_id = job["result"]
    cfg = TrainingConfig(
        dataset_id=dataset_id, input_columns=["title", "body"],
        target_column="label", hyperparameters=dict(FAST_HP),
    )
    _, direct_eval, direct_metadata = one_click_train(dataset, cfg)
    assert model_id == direct_metadata.model_id
    http_report = client.get(f"/api/models/{model_id}/report").json()
    assert http_report == direct_eval.to_dict()

    # predict: endpoint payload equals contract.predict on the loaded artifact
    inputs = {"title": "real00 fake01", "body": "noise02 real05 real06"}
    http_prediction = client.post(
        f"/api/models/{model_id}/predict", json={"inputs": inputs}
    ).json()
    app_service: PipelineService = client.app.state.service
    model, metadata = contract.load_model(app_service.models_dir / model_id)
    direct_prediction = contract.predict(model, metadata, inputs)
    assert http_prediction == direct_prediction.to_dict()


def test_service_preflight_failure_raises(tmp_path):
    service = PipelineService(tmp_path / "data")
    dataset_id, _ = service.upload_dataset(binary_news_csv(rows=60))
    cfg = TrainingConfig(dataset_id=dataset_id, input_columns=["title"],
                         target_column="ghost")
    with pytest.raises(PreflightFailedError):
        service.submit_training(dataset_id, cfg)


# --- guidance over HTTP -------------------------------------------------------------------

def test_guidance_endpoint_results_stage(client):
    _, model_id = _trained_model_id(client, binary_news_csv(rows=80))
    evaluation = client.get(f"/api/models/{model_id}/report").json()
    response = client.post("/api/guidance", json={
        "context": {
            "stage": "results",
            "tier": "novice",
            "payload": {
                "evaluation": evaluation,
                "metric": {"name": "f1", "value": evaluation["macro_f1"]},
            },
        },
    })
    assert response.status_code == 200
    messages = response.json()
    assert messages[0]["template_id"].startswith("metric.f1.")
    assert messages[-1]["template_id"].startswith("next.results")


def test_guidance_endpoint_inconsistent_context_is_422(client):
    response = client.post("/api/guidance", json={
        "context": {"stage": "results", "tier": "novice", "payload": {}},
    })
    assert response.status_code == 422
    assert response.json()["error"] == "InconsistentContext"
