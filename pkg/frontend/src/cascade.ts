// Cascade plan preview shown when the strategy toggle flips to cascade,
// before any training starts.

import type { CascadePlan } from "./types";

export interface StagePreview {
  index: number;
  positive: string;
  negatives: string[];
}

export interface PlanPreview {
  classCount: number;
  stages: StagePreview[];
}

export function buildPlanPreview(plan: CascadePlan): PlanPreview {
  return {
    classCount: plan.ordered_classes.length,
    stages: plan.stages.map((s) => ({
      index: s.index,
      positive: s.positive_class,
      negatives: [...s.negative_set],
    })),
  };
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderPlanPreview(preview: PlanPreview): string {
  const stages = preview.stages
    .map(
      (s) => `
    <li class="stage-preview">
      <strong>stage ${s.index}</strong>:
      <span class="positive">${esc(s.positive)}</span>
      vs ${s.negatives.map((n) => `<span class="negative">${esc(n)}</span>`).join(", ")}
    </li>`,
    )
    .join("\n");
  return `
  <div class="plan-preview">
    <p>${preview.classCount} classes become ${preview.stages.length} binary steps,
       most frequent first:</p>
    <ol>${stages}</ol>
  </div>`;
}

export function renderFlatSummary(classCount: number): string {
  return `<div class="plan-preview"><p>One model decides between all ${classCount} classes at once.</p></div>`;
}
