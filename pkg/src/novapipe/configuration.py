"""Key model parameters with safe defaults, plus pre-flight validation.

TrainingConfig enforces structural invariants at construction time (ratio
sum, non-empty inputs). Policy problems a user can cause through the API --
unknown columns, target listed among inputs, degenerate labels -- are
reported by preflight_check instead of raised, so a submission can be
rejected with the full list of findings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

from .data_intake import Dataset, DataReport
from .errors import ConfigError, UnknownColumnError

DEFAULT_SEED = 42
DEFAULT_SPLIT = (0.70, 0.15, 0.15)
DEFAULT_BACKEND = "reference-linear"
MIN_ROWS_PER_CLASS = 10  # below this, warn: stratified 70/15/15 gets thin

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

STRATEGIES = ("flat", "cascade")

_CONFIG_FIELDS = {
    "dataset_id", "input_columns", "target_column", "strategy",
    "seed", "split_ratios", "backend_id", "hyperparameters",
}


def default_hyperparameters() -> dict:
    # learning_rate/epochs sized so cascade stage probabilities saturate,
    # not just point the right way; composition needs confident stages
    return {
        "learning_rate": 1.0,
        "epochs": 50,
        "batch_size": 64,
        "l2_lambda": 1e-4,
    }


@dataclass
class TrainingConfig:
    dataset_id: str
    input_columns: list[str]
    target_column: str
    strategy: str = "flat"
    seed: int = DEFAULT_SEED
    split_ratios: tuple[float, float, float] = DEFAULT_SPLIT
    backend_id: str = DEFAULT_BACKEND
    hyperparameters: dict = field(default_factory=default_hyperparameters)

    def __post_init__(self):
        if not self.input_columns:
            raise ConfigError("input_columns must be non-empty")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        ratios = tuple(float(r) for r in self.split_ratios)
        if len(ratios) != 3:
            raise ConfigError("split_ratios must have exactly three entries")
        if any(r <= 0 for r in ratios):
            raise ConfigError("split_ratios must all be positive")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ConfigError(f"split_ratios must sum to 1, got {sum(ratios)}")
        self.split_ratios = ratios
        hp = default_hyperparameters()
        hp.update(self.hyperparameters or {})
        self.hyperparameters = hp

    def to_json(self) -> str:
        d = asdict(self)
        d["split_ratios"] = list(self.split_ratios)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        unknown = set(d) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        required = {"dataset_id", "input_columns", "target_column"}
        missing = required - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        kwargs = dict(d)
        if "split_ratios" in kwargs:
            kwargs["split_ratios"] = tuple(kwargs["split_ratios"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "TrainingConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_dict(d)


@dataclass(frozen=True)
class PreflightIssue:
    code: str
    severity: str  # "error" | "warning"
    subject: str
    message: str

    def to_dict(self) -> dict:
        return asdict(self)


def default_config(report: DataReport, target: str) -> TrainingConfig:
    """Safe default configuration: text columns as inputs, flat strategy."""
    names = report.column_names
    if target not in names:
        raise UnknownColumnError(target)
    text_cols = [p.name for p in report.profiles
                 if p.inferred_kind == "text" and p.name != target]
    inputs = text_cols if text_cols else [n for n in names if n != target]
    return TrainingConfig(
        dataset_id=report.dataset_id,
        input_columns=inputs,
        target_column=target,
    )


def preflight_check(d: Dataset, cfg: TrainingConfig) -> list[PreflightIssue]:
    """Validate a configuration against a dataset before training.

    Returns findings ordered errors-first; an empty list means training may
    proceed. Warnings never block.
    """
    errors: list[PreflightIssue] = []
    warnings: list[PreflightIssue] = []
    columns = set(d.column_names)

    target_ok = cfg.target_column in columns
    if not target_ok:
        errors.append(PreflightIssue(
            "TargetMissing", SEVERITY_ERROR, cfg.target_column,
            f"target column {cfg.target_column!r} is not in the dataset",
        ))

    present_inputs = []
    for col in cfg.input_columns:
        if col not in columns:
            errors.append(PreflightIssue(
                "InputMissing", SEVERITY_ERROR, col,
                f"input column {col!r} is not in the dataset",
            ))
        else:
            present_inputs.append(col)

    if cfg.target_column in cfg.input_columns:
        errors.append(PreflightIssue(
            "TargetInInputs", SEVERITY_ERROR, cfg.target_column,
            f"target column {cfg.target_column!r} must not be an input",
        ))

    for col in present_inputs:
        cells = d.column(col)
        if cells and all(c is None for c in cells):
            errors.append(PreflightIssue(
                "AllMissingInput", SEVERITY_ERROR, col,
                f"input column {col!r} has no values at all",
            ))

    if target_ok:
        labels = [c for c in d.column(cfg.target_column) if c is not None]
        if not labels:
            errors.append(PreflightIssue(
                "EmptyDataset", SEVERITY_ERROR, cfg.target_column,
                "no rows remain after dropping rows with a missing target",
            ))
        else:
            counts: dict[str, int] = {}
            for lab in labels:
                counts[lab] = counts.get(lab, 0) + 1
            if len(counts) < 2:
                only = next(iter(counts))
                errors.append(PreflightIssue(
                    "SingleClass", SEVERITY_ERROR, only,
                    f"target has a single class {only!r}; need at least two",
                ))
            else:
                for lab in sorted(counts):
                    if counts[lab] < MIN_ROWS_PER_CLASS:
                        warnings.append(PreflightIssue(
                            "TooFewSamplesPerClass", SEVERITY_WARNING, lab,
                            f"class {lab!r} has only {counts[lab]} rows; "
                            f"fewer than {MIN_ROWS_PER_CLASS} makes the "
                            "train/val/test split unreliable",
                        ))
    elif d.row_count == 0:
        errors.append(PreflightIssue(
            "EmptyDataset", SEVERITY_ERROR, cfg.target_column,
            "dataset has no rows",
        ))

    return errors + warnings


def has_blocking_issues(issues: list[PreflightIssue]) -> bool:
    return any(i.severity == SEVERITY_ERROR for i in issues)
