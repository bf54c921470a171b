// Single-page view state. Stages follow the pipeline order and the results
// stage is unreachable until a training job has finished.

export const STAGE_ORDER = [
  "intake",
  "configure",
  "training",
  "results",
  "inference",
] as const;

export type Stage = (typeof STAGE_ORDER)[number];
export type JobPhase = "idle" | "queued" | "running" | "done" | "failed";

export interface ViewState {
  stage: Stage;
  datasetId: string | null;
  targetColumn: string | null;
  modelId: string | null;
  jobId: string | null;
  jobPhase: JobPhase;
  pollingHandle: number | null;
}

export function initialState(): ViewState {
  return {
    stage: "intake",
    datasetId: null,
    targetColumn: null,
    modelId: null,
    jobId: null,
    jobPhase: "idle",
    pollingHandle: null,
  };
}

export function canEnter(stage: Stage, state: ViewState): boolean {
  switch (stage) {
    case "intake":
      return true;
    case "configure":
      return state.datasetId !== null;
    case "training":
      return state.jobId !== null;
    case "results":
      return state.jobPhase === "done" && state.modelId !== null;
    case "inference":
      return state.modelId !== null;
  }
}

export function enterStage(state: ViewState, stage: Stage): ViewState {
  if (!canEnter(stage, state)) {
    throw new Error(`stage ${stage} is not reachable yet`);
  }
  return { ...state, stage };
}

export function stageIndex(stage: Stage): number {
  return STAGE_ORDER.indexOf(stage);
}
