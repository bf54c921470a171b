// Inference form generated from the model metadata: one text field per
// input-schema entry, in schema order. Submitting calls the predict
// endpoint; 422 input errors land inline on their fields.

import type { InputError, ModelMetadata, Prediction } from "./types";

export interface FormField {
  name: string;
  kind: string;
  required: boolean;
  description: string;
  value: string;
  error: string | null;
}

export interface InferenceFormModel {
  modelId: string;
  strategy: "flat" | "cascade";
  fields: FormField[];
  formError: string | null;
}

export function buildInferenceForm(metadata: ModelMetadata): InferenceFormModel {
  return {
    modelId: metadata.model_id,
    strategy: metadata.strategy,
    fields: metadata.input_schema.map((entry) => ({
      name: entry.name,
      kind: entry.kind,
      required: true,
      description: `${entry.kind} column "${entry.name}" used during training`,
      value: "",
      error: null,
    })),
    formError: null,
  };
}

export function formInputs(form: InferenceFormModel): Record<string, string> {
  const inputs: Record<string, string> = {};
  for (const field of form.fields) {
    inputs[field.name] = field.value;
  }
  return inputs;
}

export function applyInputErrors(
  form: InferenceFormModel,
  errors: InputError[],
): InferenceFormModel {
  const byField = new Map(errors.map((e) => [e.name, e.code]));
  const known = new Set(form.fields.map((f) => f.name));
  const strays = errors.filter((e) => !known.has(e.name));
  return {
    ...form,
    fields: form.fields.map((field) => ({
      ...field,
      error: byField.has(field.name) ? String(byField.get(field.name)) : null,
    })),
    formError: strays.length
      ? `unexpected fields: ${strays.map((e) => e.name).join(", ")}`
      : null,
  };
}

export interface DistributionBar {
  label: string;
  probability: number;
  widthPct: number;
  predicted: boolean;
}

export interface PredictionView {
  label: string;
  confidence: number;
  bars: DistributionBar[];
  stageTrace: { stage: number; positiveProbability: number }[] | null;
}

export function buildPredictionView(
  prediction: Prediction,
  labelOrder: string[],
): PredictionView {
  return {
    label: prediction.label,
    confidence: prediction.confidence,
    bars: labelOrder.map((label) => ({
      label,
      probability: prediction.distribution[label],
      widthPct: Math.round(prediction.distribution[label] * 1000) / 10,
      predicted: label === prediction.label,
    })),
    stageTrace: prediction.stage_trace
      ? prediction.stage_trace.map((t) => ({
          stage: t.stage,
          positiveProbability: t.positive_probability,
        }))
      : null,
  };
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export function renderInferenceForm(form: InferenceFormModel): string {
  const fields = form.fields
    .map(
      (f) => `
    <label class="field${f.error ? " field-error" : ""}">
      <span class="field-name">${esc(f.name)} <em>(${esc(f.kind)})</em></span>
      <input type="text" name="${esc(f.name)}" value="${esc(f.value)}"
             title="${esc(f.description)}" />
      ${f.error ? `<span class="error-text">${esc(f.error)}</span>` : ""}
    </label>`,
    )
    .join("\n");
  return `
  <form id="inference-form" data-model="${esc(form.modelId)}">
    ${fields}
    ${form.formError ? `<p class="error-text">${esc(form.formError)}</p>` : ""}
    <button type="submit">Predict</button>
  </form>`;
}

export function renderPrediction(view: PredictionView): string {
  const bars = view.bars
    .map(
      (b) => `
    <li class="${b.predicted ? "bar predicted" : "bar"}">
      <span class="bar-label">${esc(b.label)}</span>
      <span class="bar-track"><span class="bar-fill" style="width:${b.widthPct}%"></span></span>
      <span class="bar-value" title="${b.probability}">${(b.probability * 100).toFixed(1)}%</span>
    </li>`,
    )
    .join("\n");
  const trace = view.stageTrace
    ? `
  <ol class="stage-trace">
    ${view.stageTrace
      .map(
        (t) =>
          `<li>stage ${t.stage}: positive probability ` +
          `<span title="${t.positiveProbability}">${(t.positiveProbability * 100).toFixed(1)}%</span></li>`,
      )
      .join("\n")}
  </ol>`
    : "";
  return `
  <section class="prediction">
    <h3>Prediction: <strong>${esc(view.label)}</strong>
      <span class="confidence" title="${view.confidence}">${(view.confidence * 100).toFixed(1)}%</span>
    </h3>
    <ul class="distribution">${bars}</ul>
    ${trace}
  </section>`;
}
