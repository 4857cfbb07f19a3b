import { ApiClient } from "./api.js";
import { DashboardView } from "./dashboard.js";
import { PlaygroundView } from "./playground.js";
import { QueueView } from "./queue.js";

type TabName = "queue" | "iterations" | "playground";

export function mountApp(root: HTMLElement, client = new ApiClient()): void {
  root.innerHTML = `
    <header>
      <h1>Question diagnostics review</h1>
      <nav>
        <button data-tab="queue" class="active">Review queue</button>
        <button data-tab="iterations">Iterations</button>
        <button data-tab="playground">Playground</button>
      </nav>
    </header>
    <div id="banner" hidden></div>
    <main>
      <section id="tab-queue"></section>
      <section id="tab-iterations" hidden></section>
      <section id="tab-playground" hidden></section>
    </main>`;

  const banner = root.querySelector<HTMLElement>("#banner")!;
  const queue = new QueueView(root.querySelector("#tab-queue")!, client);
  const dashboard = new DashboardView(root.querySelector("#tab-iterations")!, client);
  const playground = new PlaygroundView(root.querySelector("#tab-playground")!, client);
  // A finished iteration refills the queue; a submitted review updates counts.
  dashboard.onAdvanced = () => void safe(() => queue.load());
  queue.onSubmitted = () => void safe(() => dashboard.load());

  async function safe(action: () => Promise<void>): Promise<void> {
    try {
      await action();
      banner.hidden = true;
    } catch (err) {
      banner.textContent = `Service unreachable: ${err instanceof Error ? err.message : err}`;
      banner.hidden = false;
    }
  }

  function show(tab: TabName): void {
    for (const name of ["queue", "iterations", "playground"] as TabName[]) {
      root.querySelector<HTMLElement>(`#tab-${name}`)!.hidden = name !== tab;
      root
        .querySelector<HTMLButtonElement>(`[data-tab="${name}"]`)!
        .classList.toggle("active", name === tab);
    }
  }

  root.querySelectorAll<HTMLButtonElement>("[data-tab]").forEach((button) => {
    button.addEventListener("click", () => show(button.dataset.tab as TabName));
  });

  void safe(() => queue.load());
  void safe(() => dashboard.load());
  void safe(() => playground.load());
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app")!);
}
