"""Deterministic, tiered guidance rendered from a fixed template catalog.

Every message is a pure function of (template_id, slots); numbers can enter
a message only through its slots, never from template text, which keeps the
assistant incapable of inventing a performance figure. An optional external
text-generation adapter can rewrap messages but is disabled by default and
never touches the deterministic path.
"""

from __future__ import annotations

import json
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

from .configuration import TrainingConfig
from .data_intake import DataReport
from .errors import (
    InconsistentContextError,
    InvalidValueError,
    UnknownMetricError,
)
from .evaluation import (
    Diagnosis,
    EvaluationReport,
    RELIANCE_MACRO_F1,
    RELIANCE_MIN_RECALL,
)

STAGES = ("intake", "configure", "training", "results", "inference")
TIERS = ("novice", "experienced")
METRICS = ("accuracy", "precision", "recall", "f1")

BAND_MEDIUM = 0.5
BAND_HIGH = 0.8
SMALL_SUPPORT = 20


def _load_catalog() -> dict[str, dict]:
    text = resources.files("novapipe").joinpath("templates/guidance.json").read_text("utf-8")
    entries = json.loads(text)
    return {entry["id"]: entry for entry in entries}


CATALOG = _load_catalog()


@dataclass(frozen=True)
class GuidanceMessage:
    template_id: str
    severity: str
    text: str
    next_step: Optional[str] = None
    anchors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "severity": self.severity,
            "text": self.text,
            "next_step": self.next_step,
            "anchors": dict(self.anchors),
        }


@dataclass
class GuidanceContext:
    stage: str
    tier: str = "novice"
    report: Optional[DataReport] = None
    config: Optional[TrainingConfig] = None
    evaluation: Optional[EvaluationReport] = None
    diagnoses: Sequence[Diagnosis] = ()


def render(template_id: str, anchors: dict) -> GuidanceMessage:
    entry = CATALOG[template_id]
    text = entry["text"].format(**anchors)
    next_step = entry["next_step"].format(**anchors) if entry["next_step"] else None
    return GuidanceMessage(
        template_id=template_id,
        severity=entry["severity"],
        text=text,
        next_step=next_step,
        anchors=dict(anchors),
    )


def band_of(value: float) -> str:
    if value < BAND_MEDIUM:
        return "low"
    if value < BAND_HIGH:
        return "medium"
    return "high"


def explain_metric(metric: str, value: float, tier: str = "novice") -> GuidanceMessage:
    """Tiered one-liner: definition and band for novices, band and a
    per-class pointer for experienced users."""
    if metric not in METRICS:
        raise UnknownMetricError(metric)
    if tier not in TIERS:
        raise InvalidValueError(f"unknown tier {tier!r}")
    if not isinstance(value, (int, float)) or not (0.0 <= value <= 1.0):
        raise InvalidValueError(f"metric value must be in [0, 1], got {value!r}")
    anchors = {"metric": metric, "value": f"{value:.2f}", "band": band_of(value)}
    return render(f"metric.{metric}.{tier}", anchors)


def reliance_cues(evaluation: EvaluationReport) -> list[GuidanceMessage]:
    """Pair the headline score with its hidden risk.

    A strong macro-F1 with a class the model barely finds gets a warning
    naming that class; otherwise thin per-class support earns a caution.
    """
    cues: list[GuidanceMessage] = []
    order = list(evaluation.confusion.labels)
    if evaluation.macro_f1 >= RELIANCE_MACRO_F1:
        for lab in sorted(evaluation.per_class, key=order.index):
            metrics = evaluation.per_class[lab]
            if metrics.recall <= RELIANCE_MIN_RECALL:
                cues.append(render("reliance.low_recall_class", {
                    "macro_f1": f"{evaluation.macro_f1:.2f}",
                    "class_name": lab,
                    "recall": f"{metrics.recall:.0%}",
                }))
    if cues:
        return cues

    small = [
        lab for lab in sorted(evaluation.per_class, key=order.index)
        if evaluation.per_class[lab].support < SMALL_SUPPORT
    ]
    if small:
        lab = min(small, key=lambda l: (evaluation.per_class[l].support, order.index(l)))
        cues.append(render("reliance.small_support", {
            "class_name": lab,
            "support": str(evaluation.per_class[lab].support),
        }))
    return cues


def next_step(ctx: GuidanceContext) -> GuidanceMessage:
    """Stage-appropriate nudge; requires the payload the stage implies."""
    if ctx.stage not in STAGES:
        raise InconsistentContextError(f"unknown stage {ctx.stage!r}")
    if ctx.stage == "results":
        if ctx.evaluation is None:
            raise InconsistentContextError("results stage requires an evaluation report")
        if any(diag.kind == "LabelImbalance" for diag in ctx.diagnoses):
            return render("next.results.cascade", {})
        return render("next.results.inspect", {})
    return render(f"next.{ctx.stage}", {})


class LlmAdapter:
    """Optional outbound rewriting hook, disabled unless an endpoint is set.

    When enabled, POSTs {"messages": [message dicts]} and expects
    {"texts": [replacement strings]} of the same length. Failures fall back
    to the untouched templated messages.
    """

    def __init__(self, endpoint: Optional[str] = None, timeout: float = 5.0):
        self.endpoint = endpoint
        self.timeout = timeout

    @property
    def enabled(self) -> bool:
        return bool(self.endpoint)

    def wrap(self, messages: list[GuidanceMessage]) -> list[GuidanceMessage]:
        if not self.enabled or not messages:
            return messages
        body = json.dumps({"messages": [m.to_dict() for m in messages]}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
            texts = payload["texts"]
            if len(texts) != len(messages):
                return messages
        except Exception:
            return messages
        return [
            GuidanceMessage(
                template_id=m.template_id,
                severity=m.severity,
                text=str(t),
                next_step=m.next_step,
                anchors=m.anchors,
            )
            for m, t in zip(messages, texts)
        ]
