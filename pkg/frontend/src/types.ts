// Wire formats of the training service. The UI renders these verbatim and
// never derives a metric or probability on its own.

export interface NumericStats {
  mean: number;
  std_dev: number;
  min: number;
  max: number;
}

export interface ColumnProfile {
  name: string;
  inferred_kind: "text" | "numeric" | "categorical";
  missing_count: number;
  distinct_count: number;
  numeric_stats: NumericStats | null;
  top_categories: [string, number][] | null;
}

export interface DataReport {
  dataset_id: string;
  row_count: number;
  profiles: ColumnProfile[];
  preview: (string | null)[][];
  duplicate_row_fraction: number;
}

export interface PreflightIssue {
  code: string;
  severity: "error" | "warning";
  subject: string;
  message: string;
}

export interface TrainingConfigInput {
  input_columns: string[];
  target_column: string;
  strategy?: "flat" | "cascade";
  seed?: number;
  hyperparameters?: Record<string, number>;
}

export interface JobProgress {
  fraction_done: number;
  current_stage: number | null;
  message: string;
}

export interface Job {
  job_id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: JobProgress;
  result: string | null;
  error: string | null;
}

export interface ClassMetrics {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface ConfusionMatrix {
  labels: string[];
  counts: number[][];
}

export interface EvaluationReport {
  accuracy: number;
  per_class: Record<string, ClassMetrics>;
  macro_f1: number;
  weighted_f1: number;
  confusion: ConfusionMatrix;
  stage_reports: EvaluationReport[] | null;
}

export interface StageSpec {
  index: number;
  positive_class: string;
  negative_set: string[];
}

export interface CascadePlan {
  ordered_classes: string[];
  stages: StageSpec[];
}

export interface SchemaEntry {
  name: string;
  kind: string;
}

export interface ModelMetadata {
  model_id: string;
  created_at: string;
  strategy: "flat" | "cascade";
  backend_id: string;
  input_schema: SchemaEntry[];
  label_order: string[];
  cascade_plan: CascadePlan | null;
  feature_spec_digest: string;
  metrics_snapshot: EvaluationReport;
  artifact_version: number;
  artifact_checksum: string;
}

export interface StageTraceEntry {
  stage: number;
  positive_probability: number;
}

export interface Prediction {
  label: string;
  confidence: number;
  distribution: Record<string, number>;
  stage_trace: StageTraceEntry[] | null;
}

export interface InputError {
  code: "MissingInput" | "UnknownInput";
  name: string;
}

export interface Diagnosis {
  kind: string;
  severity: "info" | "warning" | "severe";
  subject: string;
  evidence: Record<string, unknown>;
  explanation: string;
}

export interface GuidanceMessage {
  template_id: string;
  severity: "info" | "warning";
  text: string;
  next_step: string | null;
  anchors: Record<string, unknown>;
}
