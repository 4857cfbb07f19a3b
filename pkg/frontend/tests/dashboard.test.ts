import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { DashboardView } from "../src/dashboard.js";
import { MockServer, iterationRecord } from "./helpers.js";

function setup(records = [iterationRecord(0, 0.55), iterationRecord(1, 0.66), iterationRecord(2, 0.7)]) {
  const server = new MockServer();
  server.on("GET", "/api/iterations", () => ({ body: { iterations: records } }));
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const view = new DashboardView(root, new ApiClient("", server.fetch));
  return { server, root, view };
}

describe("DashboardView", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders one row per iteration with API numbers verbatim", async () => {
    const { root, view } = setup();
    await view.load();
    const rows = [...root.querySelectorAll<HTMLElement>("tbody tr")];
    expect(rows).toHaveLength(3);
    const first = rows[0].querySelectorAll("td");
    expect(first[0].textContent?.trim()).toBe("iter_0");
    expect(first[1].textContent).toBe("100");
    expect(first[4].textContent).toBe("55.0");  // micro F1 as a percentage
  });

  it("prompts to run training when history is empty", async () => {
    const { root, view } = setup([]);
    await view.load();
    expect(root.querySelector(".empty")?.textContent).toMatch(/train/);
  });

  it("appends the new record after a successful advance", async () => {
    const { server, root, view } = setup();
    server.on("POST", "/api/iterations/advance", () => ({
      body: { iteration: iterationRecord(3, 0.74) },
    }));
    await view.load();
    await view.advance();
    expect(view.records).toHaveLength(4);
    expect(root.querySelectorAll("tbody tr")).toHaveLength(4);
    expect(view.status).toBe("idle");
  });

  it("disables the button while a request is in flight", async () => {
    const { server, root, view } = setup();
    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const slowFetch = async (input: string, init?: RequestInit) => {
      if (input.endsWith("/advance")) {
        await gate;
        return new Response(
          JSON.stringify({ iteration: iterationRecord(3, 0.74) }),
          { status: 200, headers: { "Content-Type": "application/json" } },
        );
      }
      return server.fetch(input, init);
    };
    const view2 = new DashboardView(root, new ApiClient("", slowFetch));
    await view2.load();
    const pending = view2.advance();
    expect(root.querySelector<HTMLButtonElement>("#advance")?.disabled).toBe(true);
    release!();
    await pending;
    expect(root.querySelector<HTMLButtonElement>("#advance")?.disabled).toBe(false);
  });

  it("renders 423 as an in-progress state, not an error", async () => {
    const { server, root, view } = setup();
    server.on("POST", "/api/iterations/advance", () => ({
      status: 423,
      body: { error: { code: "iteration_in_progress", message: "locked" } },
    }));
    await view.load();
    await view.advance();
    expect(view.status).toBe("locked");
    expect(root.querySelector(".notice")?.textContent).toMatch(/already running/);
    expect(view.records).toHaveLength(3);
  });
});
