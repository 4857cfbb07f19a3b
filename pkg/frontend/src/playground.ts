import { ApiClient } from "./api.js";
import { escapeHtml } from "./html.js";
import type { EvaluateResponse } from "./types.js";

export interface PlaygroundState {
  passage: string;
  answer: string;
  question: string;
  dimension: string;
  busy: boolean;
  vanilla: EvaluateResponse | null;
  errorAware: EvaluateResponse | null;
  message: string | null;
}

export function canSubmit(state: Pick<PlaygroundState, "passage" | "question" | "busy">): boolean {
  return !state.busy && state.passage.trim() !== "" && state.question.trim() !== "";
}

export function renderResultPane(title: string, result: EvaluateResponse | null): string {
  if (!result) {
    return `<div class="pane"><h3>${escapeHtml(title)}</h3><p class="hint">No result yet.</p></div>`;
  }
  const diagnostics =
    result.diagnosed_errors === null
      ? "<em>none used</em>"
      : escapeHtml(result.diagnosed_errors.join(", ") || "(empty)");
  const verdict = result.ok
    ? `<p class="score">Score: ${result.score}</p><p>${escapeHtml(result.reason ?? "")}</p>`
    : `<p class="notice">Backend reply could not be parsed into a score
         (${escapeHtml(result.error?.code ?? "unknown")}). This is a parse failure,
         not a score.</p>`;
  return `
    <div class="pane">
      <h3>${escapeHtml(title)}</h3>
      ${verdict}
      <p><strong>Diagnosed errors.</strong> ${diagnostics}</p>
      <details><summary>Rendered prompt</summary><pre>${escapeHtml(result.prompt)}</pre></details>
    </div>`;
}

export class PlaygroundView {
  state: PlaygroundState = {
    passage: "",
    answer: "",
    question: "",
    dimension: "answer_consistency",
    busy: false,
    vanilla: null,
    errorAware: null,
    message: null,
  };
  dimensions: string[] = [];

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
  ) {}

  async load(): Promise<void> {
    if (this.dimensions.length === 0) {
      this.dimensions = (await this.client.getTaxonomy()).dimensions;
      if (!this.dimensions.includes(this.state.dimension)) {
        this.state.dimension = this.dimensions[0] ?? "fluency";
      }
    }
    this.render();
  }

  async evaluateBoth(): Promise<void> {
    if (!canSubmit(this.state)) return;
    this.state.busy = true;
    this.state.message = null;
    this.render();
    const base = {
      passage: this.state.passage,
      answer: this.state.answer,
      question: this.state.question,
      dimension: this.state.dimension,
    };
    try {
      const [vanilla, errorAware] = await Promise.all([
        this.client.evaluate({ ...base, mode: "vanilla" }),
        this.client.evaluate({ ...base, mode: "error_aware" }),
      ]);
      this.state.vanilla = vanilla;
      this.state.errorAware = errorAware;
    } catch (err) {
      this.state.message = err instanceof Error ? err.message : String(err);
    } finally {
      this.state.busy = false;
      this.render();
    }
  }

  render(): void {
    const options = this.dimensions
      .map(
        (d) =>
          `<option value="${escapeHtml(d)}" ${d === this.state.dimension ? "selected" : ""}>${escapeHtml(d)}</option>`,
      )
      .join("");
    const disabled = canSubmit(this.state) ? "" : "disabled";
    const message = this.state.message
      ? `<p class="notice">${escapeHtml(this.state.message)}</p>`
      : "";
    this.root.innerHTML = `
      <div class="panel-head"><h2>Evaluation playground</h2></div>
      <div class="form">
        <label>Passage <textarea id="pg-passage" rows="3">${escapeHtml(this.state.passage)}</textarea></label>
        <label>Answer <input id="pg-answer" value="${escapeHtml(this.state.answer)}"></label>
        <label>Question <input id="pg-question" value="${escapeHtml(this.state.question)}"></label>
        <label>Dimension <select id="pg-dimension">${options}</select></label>
        <button id="pg-run" ${disabled}>${this.state.busy ? "Evaluating…" : "Evaluate both modes"}</button>
      </div>
      ${message}
      <div class="panes">
        ${renderResultPane("Vanilla", this.state.vanilla)}
        ${renderResultPane("Error-aware", this.state.errorAware)}
      </div>`;
    this.bind();
  }

  private bind(): void {
    const passage = this.root.querySelector<HTMLTextAreaElement>("#pg-passage");
    passage?.addEventListener("input", () => {
      this.state.passage = passage.value;
      this.updateSubmit();
    });
    const answer = this.root.querySelector<HTMLInputElement>("#pg-answer");
    answer?.addEventListener("input", () => {
      this.state.answer = answer.value;
    });
    const question = this.root.querySelector<HTMLInputElement>("#pg-question");
    question?.addEventListener("input", () => {
      this.state.question = question.value;
      this.updateSubmit();
    });
    const dimension = this.root.querySelector<HTMLSelectElement>("#pg-dimension");
    dimension?.addEventListener("change", () => {
      this.state.dimension = dimension.value;
    });
    this.root
      .querySelector("#pg-run")
      ?.addEventListener("click", () => void this.evaluateBoth());
  }

  private updateSubmit(): void {
    const button = this.root.querySelector<HTMLButtonElement>("#pg-run");
    if (button) button.disabled = !canSubmit(this.state);
  }
}
