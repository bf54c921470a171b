"""One-click training orchestration and the reference linear backend.

The only shipped backend is "reference-linear": multinomial softmax
regression trained with seed-deterministic mini-batch gradient descent and
best-validation-epoch early stopping. Cascade stages reuse the same K=2
machinery, so there is a single trainer code path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import configuration
from .cascade import CascadePlan, build_cascade_plan, compose_distribution, stage_subset
from .configuration import TrainingConfig, preflight_check
from .data_intake import Dataset, profile_dataset
from .errors import (
    NonFiniteLossError,
    PreflightFailedError,
    ShapeMismatchError,
    UnknownBackendError,
)
from .features import (
    DEFAULT_HASH_DIMENSIONS,
    FeatureSpec,
    LabelEncoder,
    encode_labels,
    fit_features,
    join_inputs,
    stratified_split,
    vectorize_all,
)

REFERENCE_BACKEND = "reference-linear"

ProgressSink = Callable[["TrainingProgress"], None]


@dataclass
class LinearModel:
    weights: np.ndarray  # (hash_dimensions, K)
    bias: np.ndarray     # (K,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ShapeMismatchError("weights must be 2-D and bias 1-D")
        if self.weights.shape[1] != self.bias.shape[0]:
            raise ShapeMismatchError(
                f"weights {self.weights.shape} vs bias {self.bias.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise NonFiniteLossError("model parameters are not finite")

    @property
    def num_classes(self) -> int:
        return self.bias.shape[0]


class Gradients(NamedTuple):
    weights: np.ndarray
    bias: np.ndarray


@dataclass(frozen=True)
class Hyperparameters:
    learning_rate: float = 1.0
    epochs: int = 50
    batch_size: int = 64
    l2_lambda: float = 1e-4

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.l2_lambda < 0:
            raise ValueError("hyperparameters must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")

    @classmethod
    def from_mapping(cls, hp: dict) -> "Hyperparameters":
        known = {"learning_rate", "epochs", "batch_size", "l2_lambda"}
        unknown = set(hp) - known
        if unknown:
            raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
        return cls(**hp)


@dataclass
class TrainingProgress:
    fraction_done: float
    current_stage: Optional[int] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "fraction_done": self.fraction_done,
            "current_stage": self.current_stage,
            "message": self.message,
        }


@dataclass
class TrainedModel:
    strategy: str
    encoder: LabelEncoder
    feature_spec: FeatureSpec
    flat_model: Optional[LinearModel] = None
    stage_models: Optional[tuple[LinearModel, ...]] = None
    cascade_plan: Optional[CascadePlan] = None

    def __post_init__(self):
        if self.strategy == "flat":
            if self.flat_model is None or self.stage_models is not None:
                raise ValueError("flat strategy requires exactly flat_model")
        elif self.strategy == "cascade":
            if self.stage_models is None or self.flat_model is not None:
                raise ValueError("cascade strategy requires exactly stage_models")
            if self.cascade_plan is None:
                raise ValueError("cascade strategy requires a cascade_plan")
            expected = self.encoder.num_classes - 1
            if len(self.stage_models) != expected:
                raise ValueError(
                    f"expected {expected} stage models, got {len(self.stage_models)}"
                )
        else:
            raise ValueError(f"unknown strategy {self.strategy!r}")


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def loss_and_gradient(
    model: LinearModel, x, y_onehot: np.ndarray, l2_lambda: float
) -> tuple[float, Gradients]:
    """Mean cross-entropy with L2 on the weights (bias unpenalized).

    loss   = -(1/n) sum_i ln p_{i,y_i} + (l2/2) ||W||^2
    dW     = (1/n) X^T (P - Y) + l2 * W
    dbias  = column means of (P - Y)
    """
    y_onehot = np.asarray(y_onehot, dtype=np.float64)
    n = x.shape[0]
    if y_onehot.shape != (n, model.num_classes):
        raise ShapeMismatchError(
            f"labels {y_onehot.shape} vs ({n}, {model.num_classes})"
        )
    if x.shape[1] != model.weights.shape[0]:
        raise ShapeMismatchError(
            f"features {x.shape} vs weights {model.weights.shape}"
        )

    with np.errstate(over="ignore"):  # overflow -> inf -> NonFiniteLoss upstream
        logits = x @ model.weights + model.bias
        log_p = _log_softmax(logits)
        data_loss = -float(np.sum(log_p * y_onehot)) / n
        loss = data_loss + 0.5 * l2_lambda * float(np.sum(model.weights ** 2))

        delta = np.exp(log_p) - y_onehot  # P - Y
        grad_w = (x.T @ delta) / n + l2_lambda * model.weights
        grad_b = delta.mean(axis=0)
    return loss, Gradients(weights=np.asarray(grad_w), bias=grad_b)


def _one_hot(y: np.ndarray, num_classes: int) -> np.ndarray:
    return np.eye(num_classes, dtype=np.float64)[np.asarray(y, dtype=np.int64)]


def _macro_f1_int(y_true: np.ndarray, y_pred: np.ndarray, num_classes: int) -> float:
    f1s = []
    for c in range(num_classes):
        tp = int(np.sum((y_true == c) & (y_pred == c)))
        fp = int(np.sum((y_true != c) & (y_pred == c)))
        fn = int(np.sum((y_true == c) & (y_pred != c)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return sum(f1s) / num_classes


def fit(
    backend_id: str,
    train: tuple,
    val: tuple,
    hp: Hyperparameters,
    seed: int,
    num_classes: Optional[int] = None,
) -> LinearModel:
    """Train the reference linear backend; returns best-validation-epoch weights.

    ``train`` and ``val`` are (X, y) pairs with integer class labels.
    Deterministic given identical data, seed, and hyperparameters.
    """
    if backend_id != REFERENCE_BACKEND:
        raise UnknownBackendError(backend_id)

    x_train, y_train = train
    x_val, y_val = val
    y_train = np.asarray(y_train, dtype=np.int64)
    y_val = np.asarray(y_val, dtype=np.int64)
    if num_classes is None:
        num_classes = int(max(y_train.max(initial=0), y_val.max(initial=0))) + 1

    n = x_train.shape[0]
    dims = x_train.shape[1]
    y_onehot = _one_hot(y_train, num_classes)

    weights = np.zeros((dims, num_classes), dtype=np.float64)
    bias = np.zeros(num_classes, dtype=np.float64)
    rng = np.random.default_rng(seed)

    best_f1 = -1.0
    best_weights, best_bias = weights.copy(), bias.copy()

    for _ in range(hp.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            batch = perm[start:start + hp.batch_size]
            model = LinearModel(weights=weights, bias=bias)
            loss, grads = loss_and_gradient(
                model, x_train[batch], y_onehot[batch], hp.l2_lambda
            )
            if not np.isfinite(loss):
                raise NonFiniteLossError(
                    f"loss became {loss}; lower the learning rate or check the data"
                )
            weights = weights - hp.learning_rate * grads.weights
            bias = bias - hp.learning_rate * grads.bias
            if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
                raise NonFiniteLossError("parameters diverged to non-finite values")

        if x_val.shape[0]:
            logits = x_val @ weights + bias
            val_f1 = _macro_f1_int(y_val, np.argmax(logits, axis=1), num_classes)
        else:
            val_f1 = 0.0
        # ties go to the later epoch: keep sharpening confidence as long as
        # validation F1 has not degraded
        if val_f1 >= best_f1:
            best_f1 = val_f1
            best_weights, best_bias = weights.copy(), bias.copy()

    return LinearModel(weights=best_weights, bias=best_bias)


def predict_proba_flat(model: LinearModel, x) -> np.ndarray:
    return softmax(x @ model.weights + model.bias)


def stage_positive_probabilities(trained: TrainedModel, x) -> np.ndarray:
    """Per-row positive probability for every cascade stage, shape (n, K-1)."""
    cols = []
    for stage_model in trained.stage_models:
        probs = predict_proba_flat(stage_model, x)
        cols.append(probs[:, 1])
    return np.column_stack(cols)


def predict_binary_stage(trained: TrainedModel, stage_index: int, texts: Sequence[str]) -> np.ndarray:
    """Positive-class probability of one stage model over raw texts."""
    x = vectorize_all(list(texts), trained.feature_spec)
    probs = predict_proba_flat(trained.stage_models[stage_index], x)
    return probs[:, 1]


def distributions_for(trained: TrainedModel, x) -> np.ndarray:
    """Class-probability rows in encoder label order, for flat or cascade."""
    if trained.strategy == "flat":
        return predict_proba_flat(trained.flat_model, x)
    stage_p = stage_positive_probabilities(trained, x)
    return np.vstack([compose_distribution(row) for row in stage_p])


class _Progress:
    """Monotone progress publisher; never lets fraction_done decrease."""

    def __init__(self, sink: Optional[ProgressSink]):
        self._sink = sink
        self._fraction = 0.0

    def emit(self, fraction: float, message: str, stage: Optional[int] = None):
        self._fraction = max(self._fraction, min(1.0, fraction))
        if self._sink is not None:
            self._sink(TrainingProgress(
                fraction_done=self._fraction, current_stage=stage, message=message,
            ))


def one_click_train(
    d: Dataset,
    cfg: TrainingConfig,
    progress: Optional[ProgressSink] = None,
):
    """Run the whole pipeline with no further input.

    Drops missing-target rows, splits, encodes labels, fits features on the
    training split, trains the flat model or every cascade stage, evaluates
    on the held-out test split, and assembles the inference metadata.

    Returns (TrainedModel, EvaluationReport, ModelMetadata).
    """
    from . import contract  # deferred: contract imports this module's types
    from .evaluation import classification_report, confusion_matrix, stage_reports

    tracker = _Progress(progress)

    issues = preflight_check(d, cfg)
    if configuration.has_blocking_issues(issues):
        raise PreflightFailedError([i for i in issues if i.severity == "error"])
    tracker.emit(0.02, "preflight passed")

    hp_map = dict(cfg.hyperparameters)
    hash_dimensions = int(hp_map.pop("hash_dimensions", DEFAULT_HASH_DIMENSIONS))
    hp = Hyperparameters.from_mapping(hp_map)

    target_idx = d.column_index(cfg.target_column)
    kept_rows = tuple(row for row in d.rows if row[target_idx] is not None)
    working = Dataset(column_names=d.column_names, rows=kept_rows)

    split = stratified_split(working, cfg.target_column, cfg.split_ratios, cfg.seed)
    tracker.emit(0.08, "split assigned")

    texts = [
        join_inputs(working.row_dict(i), cfg.input_columns)
        for i in range(working.row_count)
    ]
    labels = [row[target_idx] for row in kept_rows]

    part = {p: split.indices(p) for p in ("train", "val", "test")}
    train_labels = [labels[i] for i in part["train"]]
    encoder = encode_labels(train_labels)
    tracker.emit(0.12, "labels encoded")

    spec = fit_features([texts[i] for i in part["train"]], hash_dimensions=hash_dimensions)
    tracker.emit(0.2, "features fitted")

    x = {p: vectorize_all([texts[i] for i in part[p]], spec) for p in part}

    if cfg.strategy == "flat":
        tracker.emit(0.25, "training flat model")
        flat = fit(
            cfg.backend_id,
            (x["train"], encoder.encode(train_labels)),
            (x["val"], encoder.encode([labels[i] for i in part["val"]])),
            hp,
            cfg.seed,
            num_classes=encoder.num_classes,
        )
        trained = TrainedModel(
            strategy="flat", encoder=encoder, feature_spec=spec, flat_model=flat,
        )
        tracker.emit(0.85, "flat model trained")
    else:
        val_labels = [labels[i] for i in part["val"]]
        counts = {lab: train_labels.count(lab) for lab in set(train_labels)}
        plan = build_cascade_plan(counts)
        stage_models = []
        for stage in plan.stages:
            tracker.emit(
                0.25 + 0.6 * stage.index / len(plan.stages),
                f"training stage {stage.index}: {stage.positive_class} vs rest",
                stage=stage.index,
            )
            tr_idx, tr_y = stage_subset(train_labels, stage)
            va_idx, va_y = stage_subset(val_labels, stage)
            stage_models.append(fit(
                cfg.backend_id,
                (x["train"][tr_idx], tr_y),
                (x["val"][va_idx], va_y),
                hp,
                cfg.seed + stage.index,
                num_classes=2,
            ))
        trained = TrainedModel(
            strategy="cascade",
            encoder=encoder,
            feature_spec=spec,
            stage_models=tuple(stage_models),
            cascade_plan=plan,
        )
        tracker.emit(0.85, "all stages trained")

    test_labels = [labels[i] for i in part["test"]]
    dist = distributions_for(trained, x["test"])
    order = label_order_for(trained)
    y_pred = [order[np.argmax(row)] for row in dist]
    cm = confusion_matrix(test_labels, y_pred, order)
    report = classification_report(cm)
    if trained.strategy == "cascade":
        test_texts = [texts[i] for i in part["test"]]
        stages = stage_reports(trained, test_texts, test_labels)
        report = replace(report, stage_reports=tuple(stages))
    tracker.emit(0.92, "evaluated on test split")

    data_report = profile_dataset(d, dataset_id=cfg.dataset_id)
    metadata = contract.build_metadata(trained, report, cfg, data_report)
    tracker.emit(1.0, "done")
    return trained, report, metadata


def label_order_for(trained: TrainedModel) -> tuple[str, ...]:
    """Class order of distribution columns; identical for flat and cascade.

    The cascade plan orders classes by (descending train count, label), which
    is exactly the encoder order, so both strategies share one ordering.
    """
    if trained.strategy == "cascade":
        return trained.cascade_plan.ordered_classes
    return trained.encoder.ordered_labels
