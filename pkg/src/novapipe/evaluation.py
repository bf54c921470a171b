"""Confusion matrices, classification reports, per-stage reports, and
data/result diagnosis.

All ratio metrics use the 0/0 := 0 convention so reports are total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cascade import stage_subset
from .data_intake import DataReport, LabelBalance
from .errors import LengthMismatchError, NotACascadeError, UnknownLabelError

# Diagnosis thresholds
IMBALANCE_WARNING_RATIO = 3.0
IMBALANCE_SEVERE_RATIO = 10.0
MIN_CLASS_SAMPLES = 20
DUPLICATE_FRACTION_LIMIT = 0.10
RELIANCE_MACRO_F1 = 0.8
RELIANCE_MIN_RECALL = 0.5

STAGE_NEGATIVE_LABEL = "rest"


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows = true, columns = predicted

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": [list(r) for r in self.counts]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(
            labels=tuple(d["labels"]),
            counts=tuple(tuple(int(c) for c in row) for row in d["counts"]),
        )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass(frozen=True)
class EvaluationReport:
    accuracy: float
    per_class: dict[str, ClassMetrics]
    macro_f1: float
    weighted_f1: float
    confusion: ConfusionMatrix
    stage_reports: Optional[tuple["EvaluationReport", ...]] = None

    def to_dict(self) -> dict:
        d = {
            "accuracy": self.accuracy,
            "per_class": {lab: m.to_dict() for lab, m in self.per_class.items()},
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "confusion": self.confusion.to_dict(),
            "stage_reports": None,
        }
        if self.stage_reports is not None:
            d["stage_reports"] = [r.to_dict() for r in self.stage_reports]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        stages = d.get("stage_reports")
        return cls(
            accuracy=float(d["accuracy"]),
            per_class={
                lab: ClassMetrics(m["precision"], m["recall"], m["f1"], int(m["support"]))
                for lab, m in d["per_class"].items()
            },
            macro_f1=float(d["macro_f1"]),
            weighted_f1=float(d["weighted_f1"]),
            confusion=ConfusionMatrix.from_dict(d["confusion"]),
            stage_reports=tuple(cls.from_dict(s) for s in stages) if stages else None,
        )


@dataclass(frozen=True)
class Diagnosis:
    kind: str
    severity: str  # "info" | "warning" | "severe"
    subject: str
    evidence: dict = field(default_factory=dict)
    explanation: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "severity": self.severity,
            "subject": self.subject,
            "evidence": dict(self.evidence),
            "explanation": self.explanation,
        }


def confusion_matrix(
    y_true: Sequence[str], y_pred: Sequence[str], labels: Sequence[str]
) -> ConfusionMatrix:
    """counts[i][j] = number of samples with true labels[i] predicted labels[j]."""
    if len(y_true) != len(y_pred):
        raise LengthMismatchError(f"{len(y_true)} true vs {len(y_pred)} predicted")
    index = {lab: i for i, lab in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise UnknownLabelError(t)
        if p not in index:
            raise UnknownLabelError(p)
        counts[index[t]][index[p]] += 1
    return ConfusionMatrix(labels=tuple(labels), counts=tuple(tuple(r) for r in counts))


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def classification_report(cm: ConfusionMatrix) -> EvaluationReport:
    """Per-class precision/recall/F1 plus accuracy and macro/weighted F1."""
    k = len(cm.labels)
    per_class: dict[str, ClassMetrics] = {}
    total = cm.total
    trace = sum(cm.counts[i][i] for i in range(k))
    f1s = []
    weighted = 0.0
    for i, lab in enumerate(cm.labels):
        tp = cm.counts[i][i]
        fp = sum(cm.counts[r][i] for r in range(k)) - tp
        fn = sum(cm.counts[i]) - tp
        support = tp + fn
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[lab] = ClassMetrics(precision, recall, f1, support)
        f1s.append(f1)
        weighted += support * f1
    return EvaluationReport(
        accuracy=_safe_div(trace, total),
        per_class=per_class,
        macro_f1=sum(f1s) / k if k else 0.0,
        weighted_f1=_safe_div(weighted, total),
        confusion=cm,
    )


def stage_reports(model, texts: Sequence[str], labels: Sequence[str]) -> tuple[EvaluationReport, ...]:
    """Binary report per cascade stage on that stage's slice of the evaluation set.

    ``model`` is a cascade TrainedModel; each stage is scored only on rows whose
    true label belongs to the stage (positive class or its negative set), with
    binary labels (positive class vs "rest").
    """
    from .training import predict_binary_stage  # local import avoids a cycle

    if model.strategy != "cascade" or model.cascade_plan is None:
        raise NotACascadeError(f"model strategy is {model.strategy!r}")
    if len(texts) != len(labels):
        raise LengthMismatchError(f"{len(texts)} texts vs {len(labels)} labels")

    reports = []
    for stage in model.cascade_plan.stages:
        indices, y_binary = stage_subset(labels, stage)
        stage_texts = [texts[i] for i in indices]
        p_positive = predict_binary_stage(model, stage.index, stage_texts)
        y_true = [stage.positive_class if b else STAGE_NEGATIVE_LABEL for b in y_binary]
        y_pred = [
            stage.positive_class if p > 0.5 else STAGE_NEGATIVE_LABEL
            for p in p_positive
        ]
        cm = confusion_matrix(y_true, y_pred, [stage.positive_class, STAGE_NEGATIVE_LABEL])
        reports.append(classification_report(cm))
    return tuple(reports)


def diagnose(
    report: DataReport,
    balance: LabelBalance,
    evaluation: Optional[EvaluationReport] = None,
    columns: Optional[Sequence[str]] = None,
) -> list[Diagnosis]:
    """Detect common data and result problems with recomputable evidence.

    ``columns`` restricts the missing-values scan to the given input/target
    columns; by default every profiled column is examined.
    """
    findings: list[Diagnosis] = []

    ratio = balance.imbalance_ratio
    if ratio >= IMBALANCE_WARNING_RATIO:
        severity = "severe" if ratio >= IMBALANCE_SEVERE_RATIO else "warning"
        majority = max(balance.counts, key=lambda lab: (balance.counts[lab], lab))
        minority = min(balance.counts, key=lambda lab: (balance.counts[lab], lab))
        findings.append(Diagnosis(
            kind="LabelImbalance",
            severity=severity,
            subject=balance.column,
            evidence={
                "ratio": ratio,
                "majority_class": majority,
                "majority_count": balance.counts[majority],
                "minority_class": minority,
                "minority_count": balance.counts[minority],
            },
            explanation=(
                f"Class {majority!r} has {ratio:.1f}x more rows than {minority!r}; "
                "the model may mostly learn the majority class."
            ),
        ))

    for lab in sorted(balance.counts):
        count = balance.counts[lab]
        if count < MIN_CLASS_SAMPLES:
            findings.append(Diagnosis(
                kind="TooFewSamples",
                severity="warning",
                subject=lab,
                evidence={"count": count, "minimum": MIN_CLASS_SAMPLES},
                explanation=(
                    f"Class {lab!r} has only {count} rows; metrics for it will "
                    "be noisy and the model may not learn it well."
                ),
            ))

    scan = columns if columns is not None else report.column_names
    for name in scan:
        profile = report.profile_for(name)
        if profile.missing_count > 0:
            findings.append(Diagnosis(
                kind="MissingValues",
                severity="info",
                subject=name,
                evidence={"missing_count": profile.missing_count,
                          "row_count": report.row_count},
                explanation=(
                    f"Column {name!r} is missing {profile.missing_count} of "
                    f"{report.row_count} values."
                ),
            ))

    if report.duplicate_row_fraction > DUPLICATE_FRACTION_LIMIT:
        findings.append(Diagnosis(
            kind="DuplicateRows",
            severity="warning",
            subject="dataset",
            evidence={"duplicate_row_fraction": report.duplicate_row_fraction},
            explanation=(
                f"{report.duplicate_row_fraction:.0%} of rows are duplicates; "
                "they can leak between the train and test splits."
            ),
        ))

    if evaluation is not None and evaluation.macro_f1 >= RELIANCE_MACRO_F1:
        ordered = list(evaluation.confusion.labels)
        for lab in sorted(evaluation.per_class, key=ordered.index):
            metrics = evaluation.per_class[lab]
            if metrics.recall <= RELIANCE_MIN_RECALL:
                findings.append(Diagnosis(
                    kind="LowMinorityRecall",
                    severity="warning",
                    subject=lab,
                    evidence={"recall": metrics.recall, "macro_f1": evaluation.macro_f1},
                    explanation=(
                        f"The headline score looks strong, but class {lab!r} is "
                        f"found only {metrics.recall:.0%} of the time."
                    ),
                ))

    return findings
