#!/usr/bin/env python3
"""Record live API payloads as JSON fixtures for the frontend test suite.

Spins the service in-process, uploads the synthetic datasets, trains one
flat and one cascade model, and snapshots every payload the UI renders.
Run from the repository root: python3 scripts/record_fixtures.py
"""

import json
import sys
import tempfile
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from novapipe.server import create_app  # noqa: E402
from synthdata import binary_news_csv, four_class_csv  # noqa: E402

OUT = ROOT / "frontend" / "tests" / "fixtures"
FAST_HP = {"hash_dimensions": 1024}


def three_class_csv() -> bytes:
    lines = ["text,label"]
    for label, n in (("red", 30), ("green", 20), ("blue", 10)):
        for i in range(n):
            lines.append(f"{label} thing {i},{label}")
    return ("\n".join(lines) + "\n").encode()


def wait_done(client, job_id):
    while True:
        job = client.get(f"/api/jobs/{job_id}").json()
        if job["state"] in ("done", "failed"):
            assert job["state"] == "done", job
            return job
        time.sleep(0.02)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    written = {}

    with tempfile.TemporaryDirectory() as tmp:
        with TestClient(create_app(data_dir=tmp)) as client:
            binary = client.post("/api/datasets", content=binary_news_csv(rows=100)).json()
            four = client.post("/api/datasets", content=four_class_csv()).json()
            three = client.post("/api/datasets", content=three_class_csv()).json()

            written["report_dataset.json"] = binary["report"]

            for name, body, target in (
                ("plan_k2.json", binary, "label"),
                ("plan_k3.json", three, "label"),
                ("plan_k4.json", four, "category"),
            ):
                written[name] = client.get(
                    f"/api/datasets/{body['dataset_id']}/cascade-plan",
                    params={"target": target},
                ).json()

            flat_job = client.post("/api/train", json={
                "dataset_id": binary["dataset_id"],
                "config": {"input_columns": ["title", "body"], "target_column": "label",
                           "hyperparameters": FAST_HP},
            }).json()
            flat_model = wait_done(client, flat_job["job_id"])["result"]

            cascade_job = client.post("/api/train", json={
                "dataset_id": four["dataset_id"],
                "config": {"input_columns": ["description"], "target_column": "category",
                           "strategy": "cascade", "hyperparameters": FAST_HP},
            }).json()
            cascade_model = wait_done(client, cascade_job["job_id"])["result"]

            written["metadata_flat.json"] = client.get(
                f"/api/models/{flat_model}/metadata").json()
            written["metadata_cascade.json"] = client.get(
                f"/api/models/{cascade_model}/metadata").json()
            written["report_flat.json"] = client.get(
                f"/api/models/{flat_model}/report").json()
            written["report_cascade.json"] = client.get(
                f"/api/models/{cascade_model}/report").json()
            written["prediction_flat.json"] = client.post(
                f"/api/models/{flat_model}/predict",
                json={"inputs": {"title": "real01 real02", "body": "noise04 real07"}},
            ).json()
            written["prediction_cascade.json"] = client.post(
                f"/api/models/{cascade_model}/predict",
                json={"inputs": {"description": "tech01 tech02 tech05"}},
            ).json()
            written["guidance_results.json"] = client.post("/api/guidance", json={
                "context": {
                    "stage": "results",
                    "tier": "novice",
                    "payload": {
                        "evaluation": written["report_cascade.json"],
                        "metric": {"name": "f1",
                                   "value": written["report_cascade.json"]["macro_f1"]},
                        "diagnoses": [{"kind": "LabelImbalance", "severity": "warning",
                                       "subject": "category",
                                       "evidence": {"ratio": 5.0}}],
                    },
                },
            }).json()
            written["job_done.json"] = client.get(
                f"/api/jobs/{cascade_job['job_id']}").json()

    # strip idf tables: the UI never reads them and they bloat fixtures
    for name in ("metadata_flat.json", "metadata_cascade.json"):
        written[name]["feature_spec"]["idf_weights"] = {}

    for name, payload in written.items():
        (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {OUT / name}")


if __name__ == "__main__":
    main()
