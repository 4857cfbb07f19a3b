import { ApiClient, ApiError } from "./api.js";
import { escapeHtml, formatNum } from "./html.js";
import { labelSelectionError, sortByCatalog, toggleLabel } from "./labels.js";
import type { QueueItem, TaxonomyRecord } from "./types.js";

export function sortQueue(items: QueueItem[]): QueueItem[] {
  return [...items].sort(
    (a, b) => b.uncertainty - a.uncertainty || a.sample_id.localeCompare(b.sample_id),
  );
}

export interface QueueState {
  items: QueueItem[];
  selectedId: string | null;
  selection: string[];
  submitting: boolean;
  stale: boolean;
  notice: string | null;
}

export class QueueView {
  state: QueueState = {
    items: [],
    selectedId: null,
    selection: [],
    submitting: false,
    stale: false,
    notice: null,
  };
  taxonomy: TaxonomyRecord[] = [];
  onSubmitted: (() => void) | null = null;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
  ) {}

  async load(): Promise<void> {
    if (this.taxonomy.length === 0) {
      this.taxonomy = (await this.client.getTaxonomy()).errors;
    }
    const items = sortQueue(await this.client.getQueue());
    this.state.items = items;
    this.state.stale = false;
    if (!items.some((it) => it.sample_id === this.state.selectedId)) {
      this.state.selectedId = null;
      this.state.selection = [];
    }
    this.render();
  }

  select(sampleId: string): void {
    const item = this.state.items.find((it) => it.sample_id === sampleId);
    if (!item) return;
    this.state.selectedId = sampleId;
    this.state.selection = [...item.predicted];
    this.state.notice = null;
    this.render();
  }

  toggle(label: string, checked: boolean): void {
    this.state.selection = toggleLabel(this.state.selection, label, checked);
    this.render();
  }

  async submit(skip = false): Promise<void> {
    const id = this.state.selectedId;
    if (!id || this.state.submitting) return;
    const error = skip ? null : labelSelectionError(this.state.selection);
    if (error) {
      this.state.notice = error;
      this.render();
      return;
    }
    this.state.submitting = true;
    this.render();
    try {
      if (skip) {
        await this.client.skipReview(id, "ui");
      } else {
        const catalog = this.taxonomy.map((t) => t.id);
        await this.client.submitReview(id, sortByCatalog(this.state.selection, catalog), "ui");
      }
      this.state.items = this.state.items.filter((it) => it.sample_id !== id);
      this.state.selectedId = null;
      this.state.selection = [];
      this.state.notice = null;
      this.onSubmitted?.();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.stale = true;
        this.state.notice = "This item was already resolved elsewhere. Refresh the queue.";
      } else {
        this.state.notice = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.state.submitting = false;
      this.render();
    }
  }

  render(): void {
    const { items, selectedId } = this.state;
    const rows = items
      .map((item) => {
        const selected = item.sample_id === selectedId ? " selected" : "";
        return `
        <tr class="queue-row${selected}" data-id="${escapeHtml(item.sample_id)}">
          <td class="mono">${escapeHtml(item.sample_id)}</td>
          <td>${escapeHtml(item.question)}</td>
          <td>${escapeHtml(item.predicted.join(", "))}</td>
          <td class="num">${formatNum(item.uncertainty)}</td>
          <td class="num">${formatNum(item.inconsistency)}</td>
        </tr>`;
      })
      .join("");
    const table = `
      <div class="panel-head">
        <h2>Review queue</h2>
        <span class="count">${items.length} pending</span>
        <button id="queue-refresh" ${this.state.stale ? 'class="attention"' : ""}>Refresh</button>
      </div>
      <table class="queue">
        <thead><tr><th>id</th><th>question</th><th>predicted</th><th>uncert.</th><th>incons.</th></tr></thead>
        <tbody>${rows || '<tr><td colspan="5" class="empty">Queue is empty.</td></tr>'}</tbody>
      </table>`;
    this.root.innerHTML = table + this.renderDetail();
    this.bind();
  }

  private renderDetail(): string {
    const item = this.state.items.find((it) => it.sample_id === this.state.selectedId);
    if (!item) {
      return '<p class="hint">Select a queue row to review its labels.</p>';
    }
    const boxes = this.taxonomy
      .map((record) => {
        const checked = this.state.selection.includes(record.id) ? "checked" : "";
        return `
        <label class="label-box" title="${escapeHtml(record.description)}">
          <input type="checkbox" data-label="${escapeHtml(record.id)}" ${checked}>
          ${escapeHtml(record.name)}
        </label>`;
      })
      .join("");
    const bars = this.taxonomy
      .map((record, i) => {
        const value = item.confidences[i] ?? 0;
        return `
        <div class="bar-row">
          <span class="bar-name">${escapeHtml(record.id)}</span>
          <div class="bar"><div class="bar-fill" style="width:${(value * 100).toFixed(0)}%"></div></div>
          <span class="bar-value">${formatNum(value, 2)}</span>
        </div>`;
      })
      .join("");
    const notice = this.state.notice
      ? `<p class="notice">${escapeHtml(this.state.notice)}</p>`
      : "";
    return `
      <div class="detail">
        <h3 class="mono">${escapeHtml(item.sample_id)}</h3>
        <p><strong>Passage.</strong> ${escapeHtml(item.passage)}</p>
        <p><strong>Answer.</strong> ${escapeHtml(item.answer)}</p>
        <p><strong>Question.</strong> ${escapeHtml(item.question)}</p>
        <p class="mono small">p_e ${formatNum(item.p_e)} · p_v ${formatNum(item.p_v)} ·
          uncertainty ${formatNum(item.uncertainty)} · inconsistency ${formatNum(item.inconsistency)}</p>
        <div class="bars">${bars}</div>
        <div class="label-grid">${boxes}</div>
        ${notice}
        <div class="actions">
          <button id="queue-submit" ${this.state.submitting ? "disabled" : ""}>Submit labels</button>
          <button id="queue-skip" ${this.state.submitting ? "disabled" : ""}>Skip</button>
        </div>
      </div>`;
  }

  private bind(): void {
    this.root.querySelectorAll<HTMLElement>(".queue-row").forEach((row) => {
      row.addEventListener("click", () => this.select(row.dataset.id ?? ""));
    });
    this.root
      .querySelector("#queue-refresh")
      ?.addEventListener("click", () => void this.load());
    this.root.querySelectorAll<HTMLInputElement>("input[data-label]").forEach((box) => {
      box.addEventListener("change", () =>
        this.toggle(box.dataset.label ?? "", box.checked),
      );
    });
    this.root
      .querySelector("#queue-submit")
      ?.addEventListener("click", () => void this.submit(false));
    this.root
      .querySelector("#queue-skip")
      ?.addEventListener("click", () => void this.submit(true));
  }
}
