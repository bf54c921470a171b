import numpy as np
import pytest

from novapipe.data_intake import label_balance, parse_csv, profile_dataset
from novapipe.errors import LengthMismatchError, NotACascadeError, UnknownLabelError
from novapipe.evaluation import (
    ClassMetrics,
    EvaluationReport,
    classification_report,
    confusion_matrix,
    diagnose,
)
from oracles import brute_force_report


def test_confusion_worked_example():
    cm = confusion_matrix(["A", "A", "B", "B", "C"], ["A", "B", "B", "B", "C"], ["A", "B", "C"])
    assert cm.counts == ((1, 1, 0), (0, 2, 0), (0, 0, 1))


def test_confusion_perfect_is_diagonal():
    cm = confusion_matrix(list("ABAB"), list("ABAB"), ["A", "B"])
    assert cm.counts == ((2, 0), (0, 2))


def test_confusion_empty_inputs():
    cm = confusion_matrix([], [], ["A", "B"])
    assert cm.counts == ((0, 0), (0, 0))
    assert cm.total == 0


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatchError):
        confusion_matrix(["A"], [], ["A"])


def test_confusion_unknown_label():
    with pytest.raises(UnknownLabelError):
        confusion_matrix(["A"], ["Z"], ["A"])


def test_report_worked_example():
    cm = confusion_matrix(["A", "A", "B", "B", "C"], ["A", "B", "B", "B", "C"], ["A", "B", "C"])
    report = classification_report(cm)
    assert report.per_class["A"].precision == pytest.approx(1.0, abs=1e-12)
    assert report.per_class["A"].recall == pytest.approx(0.5, abs=1e-12)
    assert report.per_class["A"].f1 == pytest.approx(2 / 3, abs=1e-12)
    assert report.accuracy == pytest.approx(0.8, abs=1e-12)


def test_report_perfect_classifier():
    cm = confusion_matrix(list("AABBC"), list("AABBC"), ["A", "B", "C"])
    report = classification_report(cm)
    assert report.accuracy == 1.0
    assert report.macro_f1 == 1.0
    assert all(m.precision == m.recall == m.f1 == 1.0 for m in report.per_class.values())


def test_report_zero_over_zero_convention():
    # class C never predicted and never true: precision = recall = f1 = 0
    cm = confusion_matrix(["A", "B"], ["A", "B"], ["A", "B", "C"])
    report = classification_report(cm)
    assert report.per_class["C"] == ClassMetrics(0.0, 0.0, 0.0, 0)


def test_report_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(123)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 51))
        labels = [f"c{i}" for i in range(k)]
        y_true = [labels[i] for i in rng.integers(0, k, size=n)]
        y_pred = [labels[i] for i in rng.integers(0, k, size=n)]
        report = classification_report(confusion_matrix(y_true, y_pred, labels))
        expected = brute_force_report(y_true, y_pred, labels)
        assert report.accuracy == pytest.approx(expected["accuracy"], abs=1e-12)
        assert report.macro_f1 == pytest.approx(expected["macro_f1"], abs=1e-12)
        assert report.weighted_f1 == pytest.approx(expected["weighted_f1"], abs=1e-12)
        for lab in labels:
            got = report.per_class[lab]
            want = expected["per_class"][lab]
            assert got.precision == pytest.approx(want["precision"], abs=1e-12)
            assert got.recall == pytest.approx(want["recall"], abs=1e-12)
            assert got.f1 == pytest.approx(want["f1"], abs=1e-12)
            assert got.support == want["support"]


def test_weighted_f1_between_min_and_max():
    rng = np.random.default_rng(7)
    labels = ["a", "b", "c"]
    y_true = [labels[i] for i in rng.integers(0, 3, size=60)]
    y_pred = [labels[i] for i in rng.integers(0, 3, size=60)]
    report = classification_report(confusion_matrix(y_true, y_pred, labels))
    f1s = [m.f1 for m in report.per_class.values()]
    assert min(f1s) - 1e-12 <= report.weighted_f1 <= max(f1s) + 1e-12


def test_supports_sum_to_total():
    cm = confusion_matrix(list("AABBB"), list("ABABB"), ["A", "B"])
    report = classification_report(cm)
    assert sum(m.support for m in report.per_class.values()) == cm.total


def test_stage_reports_requires_cascade():
    from novapipe.features import FeatureSpec, LabelEncoder
    from novapipe.training import LinearModel, TrainedModel
    from novapipe.evaluation import stage_reports

    flat = TrainedModel(
        strategy="flat",
        encoder=LabelEncoder(("a", "b")),
        feature_spec=FeatureSpec(hash_dimensions=16, idf_weights={0: 1.0}),
        flat_model=LinearModel(weights=np.zeros((16, 2)), bias=np.zeros(2)),
    )
    with pytest.raises(NotACascadeError):
        stage_reports(flat, ["x"], ["a"])


# --- diagnose ------------------------------------------------------------------


def _balance(counts):
    rows = "\n".join(
        f"unique text row {lab} {i},{lab}"
        for lab, n in counts.items()
        for i in range(n)
    )
    d = parse_csv(f"text,y\n{rows}\n".encode())
    return d, profile_dataset(d), label_balance(d, "y")


def _eval_report(y_true, y_pred, labels):
    return classification_report(confusion_matrix(y_true, y_pred, labels))


def test_diagnose_imbalance_tiers():
    _, report, balance = _balance({"pass": 90, "fail": 10})
    findings = diagnose(report, balance)
    imbalance = [f for f in findings if f.kind == "LabelImbalance"]
    assert len(imbalance) == 1
    assert imbalance[0].severity == "warning"  # 9.0 >= 3 but < 10
    assert imbalance[0].evidence["ratio"] == pytest.approx(9.0, abs=0)

    _, report, balance = _balance({"pass": 100, "fail": 10})
    severe = [f for f in diagnose(report, balance) if f.kind == "LabelImbalance"]
    assert severe[0].severity == "severe"
    assert severe[0].evidence["ratio"] == pytest.approx(10.0, abs=0)


def test_diagnose_clean_data_no_findings():
    _, report, balance = _balance({"a": 50, "b": 50})
    strong = _eval_report(["a"] * 25 + ["b"] * 25, ["a"] * 25 + ["b"] * 25, ["a", "b"])
    assert diagnose(report, balance, strong) == []


def test_diagnose_too_few_samples():
    _, report, balance = _balance({"a": 19, "b": 40})
    kinds = [f.kind for f in diagnose(report, balance)]
    assert "TooFewSamples" in kinds


def test_diagnose_missing_values_scoped_to_columns():
    d = parse_csv(b"text,extra,label\nabc,,x\ndef,,y\n" + b"ghi,,x\n" * 30)
    report = profile_dataset(d)
    balance = label_balance(d, "label")
    scoped = diagnose(report, balance, columns=["text", "label"])
    assert all(f.kind != "MissingValues" for f in scoped)
    unscoped = diagnose(report, balance)
    assert any(f.kind == "MissingValues" and f.subject == "extra" for f in unscoped)


def test_diagnose_duplicate_rows():
    rows = "\n".join(["same,x"] * 30 + [f"diff{i},y" for i in range(30)])
    d = parse_csv(f"text,label\n{rows}\n".encode())
    report = profile_dataset(d)
    balance = label_balance(d, "label")
    found = [f for f in diagnose(report, balance) if f.kind == "DuplicateRows"]
    assert len(found) == 1
    assert found[0].evidence["duplicate_row_fraction"] > 0.10


def test_diagnose_low_minority_recall():
    # maj: 90/90 right; min: 5/10 right -> macro f1 0.82, minority recall 0.5
    y_true = ["maj"] * 90 + ["min"] * 10
    y_pred = ["maj"] * 90 + ["min"] * 5 + ["maj"] * 5
    evaluation = _eval_report(y_true, y_pred, ["maj", "min"])
    assert evaluation.macro_f1 >= 0.8
    _, report, balance = _balance({"maj": 90, "min": 30})
    findings = diagnose(report, balance, evaluation)
    low = [f for f in findings if f.kind == "LowMinorityRecall"]
    assert len(low) == 1
    assert low[0].subject == "min"
    assert low[0].evidence["recall"] == pytest.approx(0.5, abs=1e-12)


def test_diagnose_monotone_in_imbalance_ratio():
    previous_fired = False
    for majority in (20, 40, 70, 120, 400):
        _, report, balance = _balance({"a": majority, "b": 10})
        fired = any(f.kind == "LabelImbalance" for f in diagnose(report, balance))
        if previous_fired:
            assert fired  # raising the ratio never removes the finding
        previous_fired = fired
    assert previous_fired


def test_report_round_trip_via_dict():
    cm = confusion_matrix(["A", "B", "A"], ["A", "B", "B"], ["A", "B"])
    report = classification_report(cm)
    again = EvaluationReport.from_dict(report.to_dict())
    assert again == report
