import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { TriageController } from "../src/controller.js";
import { MockService, type LoggedRequest } from "./mockService.js";

const BASE = "http://svc.test";

function setup(tau = 2.0) {
  const svc = new MockService(tau);
  const controller = new TriageController(new ApiClient(BASE, svc.fetch));
  return { svc, controller };
}

async function reject(svc: MockService, n: number): Promise<void> {
  const client = new ApiClient(BASE, svc.fetch);
  for (let i = 0; i < n; i++) {
    const result = await client.classify(`alert tcp a any -> b 80 (sid:${i};)`);
    expect(result.status).toBe("rejected");
  }
  svc.requests = [];
}

describe("queue flow", () => {
  let svc: MockService;
  let controller: TriageController;

  beforeEach(async () => {
    ({ svc, controller } = setup());
    await reject(svc, 3);
    await controller.refreshQueue();
  });

  it("selects the newest pending item by default", () => {
    expect(controller.state.queue.length).toBe(3);
    expect(controller.state.selectedId).toBe("t-000002");
  });

  it("labeling three items in sequence issues three POSTs", async () => {
    await controller.labelSelected("low");
    await controller.labelSelected("medium");
    await controller.labelSelected("high");
    const posts = svc.requests.filter((r) => r.method === "POST");
    expect(posts.map((r) => r.path)).toEqual([
      "/triage/t-000002/label",
      "/triage/t-000001/label",
      "/triage/t-000000/label",
    ]);
    expect(posts.map((r) => (r.body as { label: string }).label)).toEqual([
      "low",
      "medium",
      "high",
    ]);
    expect(controller.state.queue).toEqual([]);
    expect(controller.state.selectedId).toBeNull();
  });

  it("labeling the only pending item empties the queue and keeps history", async () => {
    const { svc: svc1, controller: c1 } = setup();
    await reject(svc1, 1);
    await c1.refreshQueue();
    await c1.labelSelected("high");
    expect(c1.state.queue).toEqual([]);
    expect(svc1.items.get("t-000000")?.status).toBe("labeled");
  });

  it("keyboard shortcuts produce requests identical to button clicks", async () => {
    await controller.handleKey("1");
    const viaKey = svc.requests.filter((r) => r.method === "POST")[0];

    const { svc: svc2, controller: c2 } = setup();
    await reject(svc2, 3);
    await c2.refreshQueue();
    await c2.labelSelected("low"); // what the button click calls
    const viaClick = svc2.requests.filter((r) => r.method === "POST")[0];

    expect(viaKey).toEqual(viaClick satisfies LoggedRequest);
  });

  it("'n' advances the selection without any request", async () => {
    const before = svc.requests.length;
    const first = controller.state.selectedId;
    await controller.handleKey("n");
    expect(controller.state.selectedId).not.toBe(first);
    await controller.handleKey("n");
    await controller.handleKey("n");
    expect(controller.state.selectedId).toBe(first); // wraps around
    expect(svc.requests.length).toBe(before);
  });

  it("other keys are ignored", async () => {
    const before = svc.requests.length;
    await controller.handleKey("x");
    expect(svc.requests.length).toBe(before);
  });
});

describe("failure handling", () => {
  it("shows a connectivity banner when fetches fail", async () => {
    const { svc, controller } = setup();
    svc.offline = true;
    await controller.refreshQueue();
    expect(controller.state.notice).toEqual({
      kind: "connectivity",
      message: "service unreachable",
    });
    // recovery clears the banner
    svc.offline = false;
    await controller.refreshQueue();
    expect(controller.state.notice).toBeNull();
  });

  it("shows a conflict toast and reconciles on 409", async () => {
    const { svc, controller } = setup();
    await reject(svc, 2);
    await controller.refreshQueue();
    // another labeler got there first
    const selected = controller.state.selectedId!;
    svc.items.get(selected)!.status = "labeled";
    await controller.labelSelected("low");
    expect(controller.state.notice?.kind).toBe("conflict");
    // reconciliation refetched the queue, dropping the conflicting item
    expect(controller.state.queue.map((i) => i.id)).not.toContain(selected);
  });
});

describe("dashboard flow", () => {
  it("fetches report and ARC together", async () => {
    const { svc, controller } = setup(0.1);
    await controller.refreshDashboard();
    expect(controller.state.report?.au_arc).toBe(0.87);
    expect(controller.state.arc.length).toBeGreaterThan(0);
    const paths = svc.requests.map((r) => r.path);
    expect(paths).toContain("/report");
    expect(paths).toContain("/arc");
  });

  it("retrain POSTs and then re-fetches the chart data", async () => {
    const { svc, controller } = setup(0.1);
    await controller.refreshDashboard();
    svc.requests = [];
    await controller.retrain();
    const paths = svc.requests.map((r) => `${r.method} ${r.path}`);
    expect(paths[0]).toBe("POST /retrain");
    expect(paths).toContain("GET /report");
    expect(paths).toContain("GET /arc");
    expect(controller.reportIsStale()).toBe(false); // refreshed right after
  });

  it("flags a stale report until the dashboard is refreshed", async () => {
    const { svc, controller } = setup(0.1);
    await controller.refreshDashboard();
    // a retrain observed out-of-band (e.g. via another tab)
    svc.trainedAt += 10;
    controller.state.lastRetrainAt = svc.trainedAt;
    expect(controller.reportIsStale()).toBe(true);
    await controller.refreshDashboard();
    expect(controller.reportIsStale()).toBe(false);
  });
});
