// Upload wizard: file pick -> upload -> profile summary.

import type { DataReport } from "./types";

export interface ColumnSummary {
  name: string;
  kind: string;
  missing: number;
  distinct: number;
}

export interface UploadSummary {
  datasetId: string;
  rowCount: number;
  duplicateFraction: number;
  columns: ColumnSummary[];
  previewColumns: string[];
  previewRows: (string | null)[][];
}

export function buildUploadSummary(datasetId: string, report: DataReport): UploadSummary {
  return {
    datasetId,
    rowCount: report.row_count,
    duplicateFraction: report.duplicate_row_fraction,
    columns: report.profiles.map((p) => ({
      name: p.name,
      kind: p.inferred_kind,
      missing: p.missing_count,
      distinct: p.distinct_count,
    })),
    previewColumns: report.profiles.map((p) => p.name),
    previewRows: report.preview,
  };
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderUploadSummary(summary: UploadSummary): string {
  const columns = summary.columns
    .map(
      (c) => `
    <tr><td>${esc(c.name)}</td><td><code>${esc(c.kind)}</code></td>
        <td>${c.missing}</td><td>${c.distinct}</td></tr>`,
    )
    .join("\n");
  const preview = summary.previewRows
    .map(
      (row) =>
        `<tr>${row.map((cell) => `<td>${cell === null ? "<em>missing</em>" : esc(cell)}</td>`).join("")}</tr>`,
    )
    .join("\n");
  return `
  <section class="upload-summary">
    <p>${summary.rowCount} rows loaded.
       <span title="${summary.duplicateFraction}">${(summary.duplicateFraction * 100).toFixed(1)}%</span>
       duplicate rows.</p>
    <table class="profiles">
      <thead><tr><th>column</th><th>kind</th><th>missing</th><th>distinct</th></tr></thead>
      <tbody>${columns}</tbody>
    </table>
    <h3>First rows</h3>
    <table class="preview">
      <thead><tr>${summary.previewColumns.map((c) => `<th>${esc(c)}</th>`).join("")}</tr></thead>
      <tbody>${preview}</tbody>
    </table>
  </section>`;
}
