"""novapipe: one-click supervised text classification.

Validated CSV intake, minimal configuration with pre-flight checks,
deterministic flat or cascade training on a reference linear backend,
simplified evaluation with diagnosis, a persisted inference contract, and
templated context-aware guidance.
"""

from .data_intake import (
    Dataset,
    DataReport,
    LabelBalance,
    label_balance,
    parse_csv,
    profile_dataset,
)
from .configuration import (
    PreflightIssue,
    TrainingConfig,
    default_config,
    preflight_check,
)
from .features import (
    FeatureSpec,
    LabelEncoder,
    SplitAssignment,
    encode_labels,
    fit_features,
    join_inputs,
    stratified_split,
    vectorize,
    vectorize_all,
)
from .cascade import (
    CascadePlan,
    StageSpec,
    build_cascade_plan,
    compose_distribution,
    stage_subset,
)
from .training import (
    Hyperparameters,
    LinearModel,
    TrainedModel,
    TrainingProgress,
    fit,
    loss_and_gradient,
    one_click_train,
    softmax,
)
from .evaluation import (
    ConfusionMatrix,
    Diagnosis,
    EvaluationReport,
    classification_report,
    confusion_matrix,
    diagnose,
    stage_reports,
)
from .contract import (
    InputDescriptor,
    ModelMetadata,
    Prediction,
    input_descriptors,
    load_model,
    predict,
    save_model,
    validate_inputs,
)
from .guidance import (
    GuidanceContext,
    GuidanceMessage,
    explain_metric,
    next_step,
    reliance_cues,
)

__version__ = "0.1.0"
