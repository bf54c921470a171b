// Results dashboard view model. Every number here is copied verbatim from
// an API payload; this module formats, it never computes.

import type { Diagnosis, EvaluationReport, GuidanceMessage } from "./types";

export interface MetricsRow {
  label: string;
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface HeatmapCell {
  row: number;
  col: number;
  count: number;
  intensity: number; // 0..1 of the row maximum, presentation only
}

export interface StageTab {
  title: string;
  macroF1: number;
  rows: MetricsRow[];
}

export interface Banner {
  kind: string;
  severity: string;
  subject: string;
  text: string;
}

export interface ResultsView {
  accuracy: number;
  macroF1: number;
  weightedF1: number;
  rows: MetricsRow[];
  heatmapLabels: string[];
  heatmap: HeatmapCell[][];
  stageTabs: StageTab[];
  banners: Banner[];
  cues: GuidanceMessage[];
  nextStep: GuidanceMessage | null;
}

function metricsRows(report: EvaluationReport): MetricsRow[] {
  return report.confusion.labels.map((label) => {
    const m = report.per_class[label];
    return {
      label,
      precision: m.precision,
      recall: m.recall,
      f1: m.f1,
      support: m.support,
    };
  });
}

function heatmapCells(report: EvaluationReport): HeatmapCell[][] {
  const max = Math.max(1, ...report.confusion.counts.flat());
  return report.confusion.counts.map((rowCounts, row) =>
    rowCounts.map((count, col) => ({ row, col, count, intensity: count / max })),
  );
}

export function buildResultsView(
  report: EvaluationReport,
  diagnoses: Diagnosis[],
  guidance: GuidanceMessage[],
): ResultsView {
  const stageTabs: StageTab[] = (report.stage_reports ?? []).map((stage, i) => ({
    title: `stage ${i}: ${stage.confusion.labels[0]}`,
    macroF1: stage.macro_f1,
    rows: metricsRows(stage),
  }));
  return {
    accuracy: report.accuracy,
    macroF1: report.macro_f1,
    weightedF1: report.weighted_f1,
    rows: metricsRows(report),
    heatmapLabels: [...report.confusion.labels],
    heatmap: heatmapCells(report),
    stageTabs,
    banners: diagnoses.map((d) => ({
      kind: d.kind,
      severity: d.severity,
      subject: d.subject,
      text: d.explanation,
    })),
    cues: guidance.filter((g) => g.template_id.startsWith("reliance.")),
    nextStep: guidance.find((g) => g.template_id.startsWith("next.")) ?? null,
  };
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

const pct = (v: number) => `<span title="${v}">${(v * 100).toFixed(1)}%</span>`;

function renderTable(rows: MetricsRow[]): string {
  const body = rows
    .map(
      (r) => `
    <tr><td>${esc(r.label)}</td><td>${pct(r.precision)}</td><td>${pct(r.recall)}</td>
        <td>${pct(r.f1)}</td><td>${r.support}</td></tr>`,
    )
    .join("\n");
  return `
  <table class="classification-report">
    <thead><tr><th>class</th><th>precision</th><th>recall</th><th>F1</th><th>support</th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}

export function renderResults(view: ResultsView): string {
  const heatmap = view.heatmap
    .map(
      (cells, i) => `
    <tr><th>${esc(view.heatmapLabels[i])}</th>${cells
      .map(
        (c) =>
          `<td class="heat" style="--heat:${c.intensity.toFixed(3)}" title="true ${esc(
            view.heatmapLabels[c.row],
          )}, predicted ${esc(view.heatmapLabels[c.col])}">${c.count}</td>`,
      )
      .join("")}</tr>`,
    )
    .join("\n");
  const tabs = view.stageTabs
    .map(
      (tab, i) => `
    <details class="stage-tab" ${i === 0 ? "open" : ""}>
      <summary>${esc(tab.title)} (macro F1 ${pct(tab.macroF1)})</summary>
      ${renderTable(tab.rows)}
    </details>`,
    )
    .join("\n");
  const banners = view.banners
    .map(
      (b) =>
        `<div class="banner banner-${esc(b.severity)}"><strong>${esc(b.kind)}</strong> ` +
        `(${esc(b.subject)}): ${esc(b.text)}</div>`,
    )
    .join("\n");
  const cues = view.cues
    .map((c) => `<div class="cue cue-${esc(c.severity)}">${esc(c.text)}</div>`)
    .join("\n");
  const nextStep = view.nextStep?.next_step
    ? `<button class="next-step" title="${esc(view.nextStep.text)}">${esc(view.nextStep.next_step)}</button>`
    : "";
  return `
  <section class="results">
    ${banners}
    <div class="headline">
      <div class="metric">accuracy ${pct(view.accuracy)}</div>
      <div class="metric">macro F1 ${pct(view.macroF1)} ${cues}</div>
      <div class="metric">weighted F1 ${pct(view.weightedF1)}</div>
    </div>
    ${renderTable(view.rows)}
    <h3>Confusion matrix</h3>
    <table class="heatmap">
      <thead><tr><th>true \\ predicted</th>${view.heatmapLabels
        .map((l) => `<th>${esc(l)}</th>`)
        .join("")}</tr></thead>
      <tbody>${heatmap}</tbody>
    </table>
    ${tabs ? `<h3>Cascade stages</h3>${tabs}` : ""}
    ${nextStep}
  </section>`;
}
