"""Persisted inference contract: artifact save/load and auto-configured
prediction.

Artifact layout (a directory, written atomically via rename):

    metadata.json   UTF-8 JSON inference contract (schema, label order,
                    strategy, feature spec, metrics snapshot, checksum)
    weights.bin     little-endian IEEE-754 float64; flat: weight matrix
                    (hash_dimensions x K, row-major) then bias (K); cascade:
                    that pair per stage, in stage order

Inference needs nothing but these two files; the training dataset is never
consulted again.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .cascade import CascadePlan
from .data_intake import DataReport
from .configuration import TrainingConfig
from .errors import (
    ChecksumMismatchError,
    CorruptArtifactError,
    InconsistentPairError,
    IoFailureError,
    MissingInputError,
    UnknownInputError,
    UnsupportedVersionError,
)
from .evaluation import EvaluationReport
from .features import FeatureSpec, LabelEncoder
from .training import LinearModel, TrainedModel, distributions_for, label_order_for
from .features import vectorize_all, join_inputs

ARTIFACT_VERSION = 1
CHECKSUM_ALGORITHM = "sha256"
METADATA_FILE = "metadata.json"
WEIGHTS_FILE = "weights.bin"

_METADATA_FIELDS = (
    "model_id", "created_at", "strategy", "backend_id", "input_schema",
    "label_order", "cascade_plan", "feature_spec", "feature_spec_digest",
    "metrics_snapshot", "artifact_version", "artifact_checksum",
    "checksum_algorithm",
)


@dataclass(frozen=True)
class ModelMetadata:
    model_id: str
    created_at: str
    strategy: str
    backend_id: str
    input_schema: tuple[dict, ...]  # ordered {"name": ..., "kind": ...}
    label_order: tuple[str, ...]
    cascade_plan: Optional[CascadePlan]
    feature_spec: FeatureSpec
    feature_spec_digest: str
    metrics_snapshot: dict
    artifact_version: int
    artifact_checksum: str
    checksum_algorithm: str = CHECKSUM_ALGORITHM

    def __post_init__(self):
        if not self.label_order:
            raise ValueError("label_order must be non-empty")
        if not self.input_schema:
            raise ValueError("input_schema must be non-empty")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "created_at": self.created_at,
            "strategy": self.strategy,
            "backend_id": self.backend_id,
            "input_schema": [dict(e) for e in self.input_schema],
            "label_order": list(self.label_order),
            "cascade_plan": self.cascade_plan.to_dict() if self.cascade_plan else None,
            "feature_spec": self.feature_spec.to_dict(),
            "feature_spec_digest": self.feature_spec_digest,
            "metrics_snapshot": self.metrics_snapshot,
            "artifact_version": self.artifact_version,
            "artifact_checksum": self.artifact_checksum,
            "checksum_algorithm": self.checksum_algorithm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelMetadata":
        missing = [f for f in _METADATA_FIELDS if f not in d]
        if missing:
            raise CorruptArtifactError(f"metadata missing fields: {missing}")
        plan = d["cascade_plan"]
        return cls(
            model_id=d["model_id"],
            created_at=d["created_at"],
            strategy=d["strategy"],
            backend_id=d["backend_id"],
            input_schema=tuple(d["input_schema"]),
            label_order=tuple(d["label_order"]),
            cascade_plan=CascadePlan.from_dict(plan) if plan else None,
            feature_spec=FeatureSpec.from_dict(d["feature_spec"]),
            feature_spec_digest=d["feature_spec_digest"],
            metrics_snapshot=d["metrics_snapshot"],
            artifact_version=int(d["artifact_version"]),
            artifact_checksum=d["artifact_checksum"],
            checksum_algorithm=d["checksum_algorithm"],
        )


@dataclass(frozen=True)
class InputDescriptor:
    name: str
    kind: str
    required: bool = True
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "required": self.required,
            "description": self.description,
        }


@dataclass(frozen=True)
class Prediction:
    label: str
    confidence: float
    distribution: dict[str, float]
    stage_trace: Optional[tuple[dict, ...]] = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "confidence": self.confidence,
            "distribution": dict(self.distribution),
            "stage_trace": [dict(t) for t in self.stage_trace] if self.stage_trace else None,
        }


def feature_spec_digest(spec: FeatureSpec) -> str:
    payload = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def weights_payload(model: TrainedModel) -> bytes:
    """Serialize all model parameters as little-endian float64 bytes."""
    chunks = []
    models = [model.flat_model] if model.strategy == "flat" else list(model.stage_models)
    for linear in models:
        chunks.append(np.ascontiguousarray(linear.weights, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(linear.bias, dtype="<f8").tobytes())
    return b"".join(chunks)


def _expected_payload_length(metadata: ModelMetadata) -> int:
    dims = metadata.feature_spec.hash_dimensions
    k = len(metadata.label_order)
    if metadata.strategy == "flat":
        return 8 * (dims * k + k)
    return 8 * (k - 1) * (dims * 2 + 2)


def build_metadata(
    model: TrainedModel,
    report: EvaluationReport,
    cfg: TrainingConfig,
    data_report: DataReport,
) -> ModelMetadata:
    """Assemble the inference contract for a freshly trained model."""
    schema = tuple(
        {"name": col, "kind": data_report.profile_for(col).inferred_kind}
        for col in cfg.input_columns
    )
    payload = weights_payload(model)
    checksum = hashlib.sha256(payload).hexdigest()
    return ModelMetadata(
        model_id=f"m-{checksum[:16]}",
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        strategy=model.strategy,
        backend_id=cfg.backend_id,
        input_schema=schema,
        label_order=label_order_for(model),
        cascade_plan=model.cascade_plan,
        feature_spec=model.feature_spec,
        feature_spec_digest=feature_spec_digest(model.feature_spec),
        metrics_snapshot=report.to_dict(),
        artifact_version=ARTIFACT_VERSION,
        artifact_checksum=checksum,
    )


def _check_consistency(model: TrainedModel, metadata: ModelMetadata):
    k = len(metadata.label_order)
    if metadata.strategy != model.strategy:
        raise InconsistentPairError(
            f"metadata strategy {metadata.strategy!r} vs model {model.strategy!r}"
        )
    if tuple(metadata.label_order) != label_order_for(model):
        raise InconsistentPairError("label_order does not match the model's encoder")
    if model.strategy == "cascade" and len(model.stage_models) != k - 1:
        raise InconsistentPairError(
            f"expected {k - 1} stage models, got {len(model.stage_models)}"
        )
    if metadata.feature_spec_digest != feature_spec_digest(model.feature_spec):
        raise InconsistentPairError("feature spec digest mismatch")
    payload = weights_payload(model)
    if hashlib.sha256(payload).hexdigest() != metadata.artifact_checksum:
        raise InconsistentPairError("artifact checksum does not match the weights")
    return payload


def save_model(model: TrainedModel, metadata: ModelMetadata, destination) -> Path:
    """Write the artifact directory; readers never observe a partial write."""
    payload = _check_consistency(model, metadata)
    destination = Path(destination)
    tmp = destination.with_name(f".{destination.name}.tmp-{uuid.uuid4().hex[:8]}")
    try:
        tmp.mkdir(parents=True, exist_ok=False)
        (tmp / METADATA_FILE).write_text(
            json.dumps(metadata.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        (tmp / WEIGHTS_FILE).write_bytes(payload)
        os.replace(tmp, destination)
    except OSError as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        raise IoFailureError(str(exc)) from exc
    return destination


def load_model(location) -> tuple[TrainedModel, ModelMetadata]:
    """Reconstruct the (model, metadata) pair, verifying version and checksum."""
    location = Path(location)
    meta_path = location / METADATA_FILE
    weights_path = location / WEIGHTS_FILE
    if not meta_path.is_file() or not weights_path.is_file():
        raise CorruptArtifactError(f"artifact at {location} is incomplete")

    try:
        raw = json.loads(meta_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptArtifactError(f"unreadable metadata: {exc}") from None
    if not isinstance(raw, dict):
        raise CorruptArtifactError("metadata is not a JSON object")

    version = raw.get("artifact_version")
    if version != ARTIFACT_VERSION:
        raise UnsupportedVersionError(version)

    metadata = ModelMetadata.from_dict(raw)

    payload = weights_path.read_bytes()
    expected_len = _expected_payload_length(metadata)
    if len(payload) != expected_len:
        raise CorruptArtifactError(
            f"weights payload is {len(payload)} bytes, expected {expected_len}"
        )
    if hashlib.sha256(payload).hexdigest() != metadata.artifact_checksum:
        raise ChecksumMismatchError("weights payload does not match artifact_checksum")

    dims = metadata.feature_spec.hash_dimensions
    k = len(metadata.label_order)
    values = np.frombuffer(payload, dtype="<f8")

    def take(offset: int, count: int) -> tuple[np.ndarray, int]:
        return values[offset:offset + count].copy(), offset + count

    encoder = LabelEncoder(ordered_labels=tuple(metadata.label_order))
    offset = 0
    if metadata.strategy == "flat":
        w, offset = take(offset, dims * k)
        b, offset = take(offset, k)
        model = TrainedModel(
            strategy="flat",
            encoder=encoder,
            feature_spec=metadata.feature_spec,
            flat_model=LinearModel(weights=w.reshape(dims, k), bias=b),
        )
    else:
        stage_models = []
        for _ in range(k - 1):
            w, offset = take(offset, dims * 2)
            b, offset = take(offset, 2)
            stage_models.append(LinearModel(weights=w.reshape(dims, 2), bias=b))
        model = TrainedModel(
            strategy="cascade",
            encoder=encoder,
            feature_spec=metadata.feature_spec,
            stage_models=tuple(stage_models),
            cascade_plan=metadata.cascade_plan,
        )
    return model, metadata


def input_descriptors(metadata: ModelMetadata) -> list[InputDescriptor]:
    """One UI descriptor per schema entry, in schema order."""
    return [
        InputDescriptor(
            name=entry["name"],
            kind=entry["kind"],
            required=True,
            description=f"{entry['kind']} column \"{entry['name']}\" used during training",
        )
        for entry in metadata.input_schema
    ]


def validate_inputs(metadata: ModelMetadata, inputs: Mapping[str, str]) -> list[dict]:
    """Contract check: every schema column present, nothing extraneous.

    Empty text is allowed (treated as missing downstream). Returns error
    records in deterministic order; empty list means inputs are acceptable.
    """
    errors = []
    schema_names = [entry["name"] for entry in metadata.input_schema]
    for name in schema_names:
        if name not in inputs:
            errors.append({"code": "MissingInput", "name": name})
    for name in sorted(set(inputs) - set(schema_names)):
        errors.append({"code": "UnknownInput", "name": name})
    return errors


def _clean(value: str) -> Optional[str]:
    # empty / whitespace-only inference input == missing training cell
    return None if value is None or value.strip() == "" else value


def predict(
    model: TrainedModel, metadata: ModelMetadata, inputs: Mapping[str, str]
) -> Prediction:
    """Predict from the saved contract alone: join -> vectorize -> distribution."""
    errors = validate_inputs(metadata, inputs)
    if errors:
        first = errors[0]
        if first["code"] == "MissingInput":
            raise MissingInputError(first["name"])
        raise UnknownInputError(first["name"])

    schema_names = [entry["name"] for entry in metadata.input_schema]
    row = {name: _clean(inputs[name]) for name in schema_names}
    text = join_inputs(row, schema_names)
    x = vectorize_all([text], metadata.feature_spec)

    dist_row = distributions_for(model, x)[0]
    order = list(metadata.label_order)
    best = int(np.argmax(dist_row))  # first maximum wins ties, in label order

    stage_trace = None
    if model.strategy == "cascade":
        from .training import stage_positive_probabilities

        stage_p = stage_positive_probabilities(model, x)[0]
        stage_trace = tuple(
            {"stage": i, "positive_probability": float(p)}
            for i, p in enumerate(stage_p)
        )

    return Prediction(
        label=order[best],
        confidence=float(dist_row[best]),
        distribution={lab: float(p) for lab, p in zip(order, dist_row)},
        stage_trace=stage_trace,
    )
