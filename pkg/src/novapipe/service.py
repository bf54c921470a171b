"""On-disk stores, the training job queue, and the operations the HTTP
layer and CLI both call.

Datasets and model artifacts are keyed by content digests, so re-uploading
the same bytes or re-training the same configuration is idempotent. Jobs
run on a small worker pool (default one worker, which serializes training);
each job publishes an atomic, monotone progress snapshot.
"""

from __future__ import annotations

import hashlib
import queue
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from . import contract
from .configuration import TrainingConfig, preflight_check, has_blocking_issues
from .data_intake import Dataset, DataReport, label_balance, parse_csv, profile_dataset
from .cascade import CascadePlan, build_cascade_plan
from .errors import (
    PreflightFailedError,
    UnknownDatasetError,
    UnknownJobError,
    UnknownModelError,
)
from .training import TrainingProgress, one_click_train

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_DONE = "done"
JOB_FAILED = "failed"

_LEGAL_TRANSITIONS = {
    JOB_QUEUED: {JOB_RUNNING},
    JOB_RUNNING: {JOB_DONE, JOB_FAILED},
    JOB_DONE: set(),
    JOB_FAILED: set(),
}


@dataclass
class JobSnapshot:
    job_id: str
    state: str
    progress: TrainingProgress
    result: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "progress": self.progress.to_dict(),
            "result": self.result,
            "error": self.error,
        }


class _Job:
    """Mutable job record; every read goes through an atomic snapshot."""

    def __init__(self, job_id: str):
        self._lock = threading.Lock()
        self.job_id = job_id
        self.state = JOB_QUEUED
        self.progress = TrainingProgress(fraction_done=0.0, message="queued")
        self.result: Optional[str] = None
        self.error: Optional[str] = None

    def transition(self, state: str, result: Optional[str] = None,
                   error: Optional[str] = None):
        with self._lock:
            if state not in _LEGAL_TRANSITIONS[self.state]:
                raise RuntimeError(f"illegal job transition {self.state} -> {state}")
            self.state = state
            if result is not None:
                self.result = result
            if error is not None:
                self.error = error
            if state == JOB_DONE:
                self.progress = TrainingProgress(
                    fraction_done=1.0, message=self.progress.message or "done",
                )

    def publish_progress(self, progress: TrainingProgress):
        with self._lock:
            fraction = max(self.progress.fraction_done, progress.fraction_done)
            self.progress = TrainingProgress(
                fraction_done=fraction,
                current_stage=progress.current_stage,
                message=progress.message,
            )

    def snapshot(self) -> JobSnapshot:
        with self._lock:
            return JobSnapshot(
                job_id=self.job_id,
                state=self.state,
                progress=TrainingProgress(
                    fraction_done=self.progress.fraction_done,
                    current_stage=self.progress.current_stage,
                    message=self.progress.message,
                ),
                result=self.result,
                error=self.error,
            )


class JobManager:
    """FIFO queue with a fixed worker pool; size 1 keeps training serialized."""

    def __init__(self, workers: int = 1):
        self._queue: queue.Queue = queue.Queue()
        self._jobs: dict[str, _Job] = {}
        self._lock = threading.Lock()
        self._workers = [
            threading.Thread(target=self._worker_loop, daemon=True, name=f"novapipe-worker-{i}")
            for i in range(max(1, workers))
        ]
        for w in self._workers:
            w.start()

    def submit(self, fn: Callable[[Callable[[TrainingProgress], None]], str]) -> str:
        job = _Job(job_id=f"job-{uuid.uuid4().hex[:12]}")
        with self._lock:
            self._jobs[job.job_id] = job
        self._queue.put((job, fn))
        return job.job_id

    def get(self, job_id: str) -> JobSnapshot:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJobError(job_id)
        return job.snapshot()

    def wait(self, job_id: str, timeout: float = 120.0) -> JobSnapshot:
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            snap = self.get(job_id)
            if snap.state in (JOB_DONE, JOB_FAILED):
                return snap
            time.sleep(0.02)
        raise TimeoutError(f"job {job_id} did not finish within {timeout}s")

    def _worker_loop(self):
        while True:
            job, fn = self._queue.get()
            job.transition(JOB_RUNNING)
            try:
                result = fn(job.publish_progress)
            except Exception as exc:  # noqa: BLE001 - job errors become state
                job.transition(JOB_FAILED, error=str(exc))
            else:
                job.transition(JOB_DONE, result=result)
            finally:
                self._queue.task_done()


class PipelineService:
    """Everything the API exposes, backed by a data directory."""

    def __init__(self, data_dir, workers: int = 1):
        self.root = Path(data_dir)
        self.datasets_dir = self.root / "datasets"
        self.models_dir = self.root / "models"
        self.datasets_dir.mkdir(parents=True, exist_ok=True)
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.jobs = JobManager(workers=workers)
        self._model_cache: dict[str, tuple] = {}
        self._cache_lock = threading.Lock()

    # -- datasets ---------------------------------------------------------

    def upload_dataset(self, data: bytes) -> tuple[str, DataReport]:
        dataset = parse_csv(data)  # validate before persisting
        dataset_id = hashlib.sha256(data).hexdigest()
        path = self.datasets_dir / f"{dataset_id}.csv"
        if not path.exists():
            tmp = path.with_suffix(f".tmp-{uuid.uuid4().hex[:8]}")
            tmp.write_bytes(data)
            tmp.replace(path)
        return dataset_id, profile_dataset(dataset, dataset_id=dataset_id)

    def dataset(self, dataset_id: str) -> Dataset:
        path = self.datasets_dir / f"{dataset_id}.csv"
        if not path.is_file():
            raise UnknownDatasetError(dataset_id)
        return parse_csv(path.read_bytes())

    def dataset_report(self, dataset_id: str) -> DataReport:
        return profile_dataset(self.dataset(dataset_id), dataset_id=dataset_id)

    def dataset_cascade_preview(self, dataset_id: str, target: str) -> CascadePlan:
        balance = label_balance(self.dataset(dataset_id), target)
        return build_cascade_plan(balance.counts)

    # -- training ---------------------------------------------------------

    def submit_training(self, dataset_id: str, cfg: TrainingConfig) -> str:
        dataset = self.dataset(dataset_id)
        cfg.dataset_id = dataset_id
        issues = preflight_check(dataset, cfg)
        if has_blocking_issues(issues):
            raise PreflightFailedError(issues)

        def run(progress_sink) -> str:
            trained, report, metadata = one_click_train(dataset, cfg, progress_sink)
            self._store_model(trained, metadata)
            return metadata.model_id

        return self.jobs.submit(run)

    def train_sync(self, dataset_id: str, cfg: TrainingConfig, timeout: float = 300.0) -> JobSnapshot:
        job_id = self.submit_training(dataset_id, cfg)
        return self.jobs.wait(job_id, timeout=timeout)

    def poll_job(self, job_id: str) -> JobSnapshot:
        return self.jobs.get(job_id)

    # -- models -----------------------------------------------------------

    def _store_model(self, trained, metadata) -> Path:
        destination = self.models_dir / metadata.model_id
        if not destination.exists():  # content-addressed: identical id, identical bytes
            contract.save_model(trained, metadata, destination)
        return destination

    def model_path(self, model_id: str) -> Path:
        path = self.models_dir / model_id
        if not path.is_dir():
            raise UnknownModelError(model_id)
        return path

    def load_model(self, model_id: str):
        with self._cache_lock:
            cached = self._model_cache.get(model_id)
        if cached is not None:
            return cached
        pair = contract.load_model(self.model_path(model_id))
        with self._cache_lock:
            self._model_cache[model_id] = pair
        return pair

    def model_metadata(self, model_id: str) -> contract.ModelMetadata:
        return self.load_model(model_id)[1]

    def model_report(self, model_id: str) -> dict:
        return self.model_metadata(model_id).metrics_snapshot

    def model_cascade_plan(self, model_id: str) -> Optional[CascadePlan]:
        return self.model_metadata(model_id).cascade_plan

    def predict(self, model_id: str, inputs: dict) -> contract.Prediction:
        model, metadata = self.load_model(model_id)
        return contract.predict(model, metadata, inputs)
