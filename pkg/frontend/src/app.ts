// Single-page wiring: upload wizard, configuration with cascade toggle,
// training progress via 1 s polling, results dashboard, metadata-driven
// inference form, and the guidance panel on the right.

import { ApiClient, ApiError } from "./api";
import { buildPlanPreview, renderFlatSummary, renderPlanPreview } from "./cascade";
import {
  applyInputErrors,
  buildInferenceForm,
  buildPredictionView,
  formInputs,
  renderInferenceForm,
  renderPrediction,
  type InferenceFormModel,
} from "./inference-form";
import { buildResultsView, renderResults } from "./results";
import { canEnter, enterStage, initialState, STAGE_ORDER, type Stage, type ViewState } from "./state";
import { buildUploadSummary, renderUploadSummary } from "./upload";
import type { DataReport, Diagnosis, GuidanceMessage, ModelMetadata } from "./types";

const POLL_INTERVAL_MS = 1000;

const api = new ApiClient("");
let state: ViewState = initialState();
let report: DataReport | null = null;
let metadata: ModelMetadata | null = null;
let form: InferenceFormModel | null = null;
let useCascade = false;

const $ = (id: string) => document.getElementById(id)!;

function setGuidance(messages: GuidanceMessage[]) {
  $("guidance-panel").innerHTML = messages
    .map(
      (m) => `
    <div class="guidance guidance-${m.severity}">
      <p>${m.text}</p>
      ${m.next_step ? `<p class="next">${m.next_step}</p>` : ""}
    </div>`,
    )
    .join("\n");
}

async function refreshGuidance(payload: Record<string, unknown> = {}) {
  try {
    setGuidance(await api.guidance({ stage: state.stage, tier: "novice", payload }));
  } catch {
    // the panel is advisory; API hiccups must not break the flow
  }
}

function showStage(stage: Stage) {
  state = enterStage(state, stage);
  for (const s of STAGE_ORDER) {
    $(`stage-${s}`).hidden = s !== stage;
    const tab = $(`tab-${s}`);
    tab.classList.toggle("active", s === stage);
    tab.toggleAttribute("disabled", !canEnter(s, state));
  }
  void refreshGuidance();
}

async function onUpload(file: File) {
  const body = await api.uploadDataset(file);
  state = { ...state, datasetId: body.dataset_id };
  report = body.report;
  $("upload-result").innerHTML = renderUploadSummary(
    buildUploadSummary(body.dataset_id, body.report),
  );
  const target = $("target-select") as HTMLSelectElement;
  target.innerHTML = body.report.profiles
    .map((p) => `<option value="${p.name}">${p.name} (${p.inferred_kind})</option>`)
    .join("");
  showStage("configure");
}

async function onCascadeToggle(checked: boolean) {
  useCascade = checked;
  const target = ($("target-select") as HTMLSelectElement).value;
  if (!checked) {
    const classes = report?.profiles.find((p) => p.name === target)?.distinct_count ?? 0;
    $("plan-preview").innerHTML = renderFlatSummary(classes);
    return;
  }
  const plan = await api.cascadePlanPreview(state.datasetId!, target);
  $("plan-preview").innerHTML = renderPlanPreview(buildPlanPreview(plan));
}

async function onTrain() {
  const target = ($("target-select") as HTMLSelectElement).value;
  const inputs = report!.profiles
    .filter((p) => p.inferred_kind === "text" && p.name !== target)
    .map((p) => p.name);
  try {
    const { job_id } = await api.train(state.datasetId!, {
      input_columns: inputs.length ? inputs : report!.profiles.map((p) => p.name).filter((n) => n !== target),
      target_column: target,
      strategy: useCascade ? "cascade" : "flat",
    });
    state = { ...state, jobId: job_id, jobPhase: "queued", targetColumn: target };
    showStage("training");
    pollJob(job_id);
  } catch (error) {
    if (error instanceof ApiError && error.preflightIssues.length) {
      $("preflight-issues").innerHTML = error.preflightIssues
        .map((i) => `<li class="issue-${i.severity}"><code>${i.code}</code> ${i.message}</li>`)
        .join("\n");
      return;
    }
    throw error;
  }
}

function pollJob(jobId: string) {
  const handle = window.setInterval(async () => {
    const job = await api.job(jobId);
    state = { ...state, jobPhase: job.state };
    $("progress-bar").style.width = `${job.progress.fraction_done * 100}%`;
    $("progress-message").textContent = job.progress.message;
    if (job.state === "done") {
      window.clearInterval(handle);
      state = { ...state, modelId: job.result };
      await onTrainingDone(job.result!);
    } else if (job.state === "failed") {
      window.clearInterval(handle);
      $("progress-message").textContent = `training failed: ${job.error}`;
    }
  }, POLL_INTERVAL_MS);
  state = { ...state, pollingHandle: handle };
}

async function onTrainingDone(modelId: string) {
  metadata = await api.modelMetadata(modelId);
  const evaluation = await api.modelReport(modelId);
  const diagnoses: Diagnosis[] = []; // surfaced via guidance payload below
  const guidance = await api.guidance({
    stage: "results",
    tier: "novice",
    payload: { evaluation },
  });
  $("results-root").innerHTML = renderResults(
    buildResultsView(evaluation, diagnoses, guidance),
  );
  form = buildInferenceForm(metadata);
  $("inference-root").innerHTML = renderInferenceForm(form);
  showStage("results");
}

async function onPredictSubmit(event: Event) {
  event.preventDefault();
  if (!form || !metadata) return;
  const element = $("inference-form") as unknown as HTMLFormElement;
  for (const field of form.fields) {
    const input = element.elements.namedItem(field.name) as HTMLInputElement | null;
    field.value = input?.value ?? "";
  }
  try {
    const prediction = await api.predict(state.modelId!, formInputs(form));
    $("prediction-root").innerHTML = renderPrediction(
      buildPredictionView(prediction, metadata.label_order),
    );
  } catch (error) {
    if (error instanceof ApiError && error.status === 422) {
      form = applyInputErrors(form, error.inputErrors);
      $("inference-root").innerHTML = renderInferenceForm(form);
      return; // no retry loop: the user edits and resubmits
    }
    throw error;
  }
}

export function boot() {
  ($("csv-input") as HTMLInputElement).addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void onUpload(file);
  });
  ($("cascade-toggle") as HTMLInputElement).addEventListener("change", (e) =>
    onCascadeToggle((e.target as HTMLInputElement).checked),
  );
  $("train-button").addEventListener("click", () => void onTrain());
  document.addEventListener("submit", (e) => {
    if ((e.target as HTMLElement).id === "inference-form") void onPredictSubmit(e);
  });
  for (const s of STAGE_ORDER) {
    $(`tab-${s}`).addEventListener("click", () => {
      if (canEnter(s, state)) showStage(s);
    });
  }
  $("stage-intake").hidden = false;
  void refreshGuidance();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
