import { ApiClient, ApiError } from "./api.js";
import { escapeHtml, formatPct } from "./html.js";
import type { IterationRecord } from "./types.js";

export type AdvanceStatus = "idle" | "advancing" | "locked" | "error";

export class DashboardView {
  records: IterationRecord[] = [];
  status: AdvanceStatus = "idle";
  message: string | null = null;
  onAdvanced: (() => void) | null = null;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
  ) {}

  async load(): Promise<void> {
    this.records = await this.client.getIterations();
    this.render();
  }

  async advance(): Promise<void> {
    if (this.status === "advancing") return;
    this.status = "advancing";
    this.message = null;
    this.render();
    try {
      const record = await this.client.advanceIteration();
      this.records = [...this.records, record];
      this.status = "idle";
      this.message = `Iteration ${record.index} finished.`;
      this.onAdvanced?.();
    } catch (err) {
      if (err instanceof ApiError && err.status === 423) {
        this.status = "locked";
        this.message = "An iteration is already running; try again when it finishes.";
      } else {
        this.status = "error";
        this.message = err instanceof Error ? err.message : String(err);
      }
    }
    this.render();
  }

  render(): void {
    const rows = this.records
      .map(
        (r) => `
        <tr data-iter="${r.index}">
          <td class="mono">iter_${r.index}</td>
          <td class="num">${r.train_size}</td>
          <td class="num">${r.added_reliable}</td>
          <td class="num">${r.added_human}</td>
          <td class="num">${formatPct(r.micro_f1)}</td>
          <td class="num">${formatPct(r.macro_f1)}</td>
          <td class="num">${formatPct(r.weighted_f1)}</td>
          <td class="num">${formatPct(r.emr)}</td>
          <td class="num">${formatPct(r.opr)}</td>
        </tr>`,
      )
      .join("");
    const empty = `
      <tr><td colspan="9" class="empty">
        No iterations yet — run <code>qgdiag train</code> to bootstrap the models.
      </td></tr>`;
    const chart = this.renderChart();
    const busy = this.status === "advancing";
    const message = this.message
      ? `<p class="notice ${this.status}">${escapeHtml(this.message)}</p>`
      : "";
    this.root.innerHTML = `
      <div class="panel-head">
        <h2>Iterations</h2>
        <button id="advance" ${busy ? "disabled" : ""}>
          ${busy ? "Advancing…" : "Advance iteration"}
        </button>
      </div>
      ${message}
      ${chart}
      <table class="iterations">
        <thead>
          <tr>
            <th>iteration</th><th>train</th><th>+reliable</th><th>+human</th>
            <th>micro F1</th><th>macro F1</th><th>weighted F1</th><th>EMR</th><th>OPR</th>
          </tr>
        </thead>
        <tbody>${rows || empty}</tbody>
      </table>`;
    this.root.querySelector("#advance")?.addEventListener("click", () => void this.advance());
  }

  private renderChart(): string {
    if (this.records.length === 0) return "";
    const bars = this.records
      .map(
        (r) => `
        <div class="chart-col" title="iter_${r.index}: micro F1 ${formatPct(r.micro_f1)}%">
          <div class="chart-bar" style="height:${Math.round(r.micro_f1 * 100)}%"></div>
          <span class="chart-label">${r.index}</span>
        </div>`,
      )
      .join("");
    return `<div class="chart" aria-label="dev micro F1 per iteration">${bars}</div>`;
  }
}
