import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { QueueView, sortQueue } from "../src/queue.js";
import { DIMENSIONS, MockServer, TAXONOMY, flush, queueItem } from "./helpers.js";

function setup(items = [queueItem("a", 0.7), queueItem("b", 0.9), queueItem("c", 0.8)]) {
  const server = new MockServer();
  let queue = [...items];
  server.on("GET", "/api/taxonomy", () => ({
    body: { errors: TAXONOMY, dimensions: DIMENSIONS },
  }));
  server.on("GET", "/api/review/queue", () => ({ body: { items: queue } }));
  for (const item of items) {
    server.on("POST", `/api/review/${item.sample_id}`, (init) => {
      const payload = JSON.parse((init?.body as string) ?? "{}");
      queue = queue.filter((it) => it.sample_id !== item.sample_id);
      return {
        body: {
          sample_id: item.sample_id,
          status: payload.skip ? "skipped" : "verified",
          human_labels: payload.skip ? null : payload.labels,
          reviewer: payload.reviewer,
          timestamp: "t",
        },
      };
    });
  }
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const view = new QueueView(root, new ApiClient("", server.fetch));
  return { server, root, view };
}

describe("sortQueue", () => {
  it("orders by uncertainty descending", () => {
    const sorted = sortQueue([queueItem("a", 0.7), queueItem("b", 0.9), queueItem("c", 0.8)]);
    expect(sorted.map((it) => it.sample_id)).toEqual(["b", "c", "a"]);
  });
});

describe("QueueView", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders pending rows sorted by uncertainty", async () => {
    const { root, view } = setup();
    await view.load();
    const ids = [...root.querySelectorAll<HTMLElement>(".queue-row")].map(
      (row) => row.dataset.id,
    );
    expect(ids).toEqual(["b", "c", "a"]);
  });

  it("pre-checks the predicted labels on selection", async () => {
    const { root, view } = setup([queueItem("a", 0.5, ["Spell", "Gram"])]);
    await view.load();
    root.querySelector<HTMLElement>('.queue-row[data-id="a"]')!.click();
    const checked = [...root.querySelectorAll<HTMLInputElement>("input[data-label]")]
      .filter((box) => box.checked)
      .map((box) => box.dataset.label);
    expect(new Set(checked)).toEqual(new Set(["Spell", "Gram"]));
  });

  it("checking NoErr unchecks other boxes in the DOM", async () => {
    const { root, view } = setup([queueItem("a", 0.5, ["Inc"])]);
    await view.load();
    root.querySelector<HTMLElement>('.queue-row[data-id="a"]')!.click();
    const noerr = root.querySelector<HTMLInputElement>('input[data-label="NoErr"]')!;
    noerr.checked = true;
    noerr.dispatchEvent(new Event("change"));
    const checked = [...root.querySelectorAll<HTMLInputElement>("input[data-label]")]
      .filter((box) => box.checked)
      .map((box) => box.dataset.label);
    expect(checked).toEqual(["NoErr"]);
  });

  it("submitting removes the row after a 200", async () => {
    const { root, view, server } = setup();
    await view.load();
    root.querySelector<HTMLElement>('.queue-row[data-id="b"]')!.click();
    await view.submit();
    await flush();
    const ids = [...root.querySelectorAll<HTMLElement>(".queue-row")].map(
      (row) => row.dataset.id,
    );
    expect(ids).toEqual(["c", "a"]);
    const submitCall = server.calls.find((c) => c.key === "POST /api/review/b");
    expect(submitCall?.body).toMatchObject({ labels: ["Inc"], reviewer: "ui" });
  });

  it("refuses to submit an invalid NoErr combination", async () => {
    const { root, view, server } = setup([queueItem("a", 0.5, ["Inc"])]);
    await view.load();
    view.select("a");
    // Bypass the DOM guard to simulate a stale client state.
    view.state.selection = ["NoErr", "Inc"];
    await view.submit();
    expect(server.calls.some((c) => c.key.startsWith("POST /api/review/"))).toBe(false);
    expect(view.state.notice).toMatch(/excludes/);
  });

  it("surfaces a refresh hint on a 409 conflict", async () => {
    const server = new MockServer();
    server.on("GET", "/api/taxonomy", () => ({
      body: { errors: TAXONOMY, dimensions: DIMENSIONS },
    }));
    server.on("GET", "/api/review/queue", () => ({
      body: { items: [queueItem("a", 0.5)] },
    }));
    server.on("POST", "/api/review/a", () => ({
      status: 409,
      body: { error: { code: "already_resolved", message: "already verified" } },
    }));
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const view = new QueueView(root, new ApiClient("", server.fetch));
    await view.load();
    view.select("a");
    await view.submit();
    expect(view.state.stale).toBe(true);
    expect(root.querySelector(".notice")?.textContent).toMatch(/Refresh/);
    expect(root.querySelector("#queue-refresh")?.className).toBe("attention");
  });

  it("shows the empty state when the queue drains", async () => {
    const { root, view } = setup([queueItem("only", 0.5)]);
    await view.load();
    view.select("only");
    await view.submit();
    expect(root.querySelector(".empty")?.textContent).toMatch(/empty/i);
  });
});
