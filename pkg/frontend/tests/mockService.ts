/**
 * In-memory stand-in for the triage service, exposed as a fetch-compatible
 * function so tests exercise the real client code path (URLs, JSON bodies,
 * status handling).  Semantics mirror the HTTP service: threshold
 * rejection, pending queue newest first, 404/409/400 on labeling,
 * serialized retrain that folds manual labels into the training set.
 */

import type { FetchLike } from "../src/api.js";
import type { TriageItem } from "../src/types.js";

export interface LoggedRequest {
  method: string;
  path: string;
  body: unknown;
}

const LABELS = ["low", "medium", "high"];

export class MockService {
  requests: LoggedRequest[] = [];
  offline = false;
  items = new Map<string, TriageItem>();
  order: string[] = [];
  labeledCount = 0;
  baseTrainedOn = 50;
  trainedOn = 50;
  trainedAt = 1000;
  retrainCount = 0;
  arcPoints: [number, number][] = [];
  scores: Record<string, number> = { low: 0.5, medium: 0.3, high: 0.2 };
  private counter = 0;

  constructor(public tau: number) {
    this.refreshArc();
  }

  private refreshArc(): void {
    // a fresh, slightly different curve per (re)train, always non-empty
    const lift = Math.min(0.05 * this.retrainCount, 0.2);
    this.arcPoints = [
      [0.0, 0.7 + lift],
      [0.25, 0.8 + lift * 0.5],
      [0.5, 0.9],
      [1.0, 1.0],
    ];
  }

  pending(): TriageItem[] {
    return this.order
      .map((id) => this.items.get(id)!)
      .filter((i) => i.status === "pending")
      .reverse();
  }

  fetch: FetchLike = async (url, init) => {
    if (this.offline) throw new TypeError("failed to fetch");
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body) : undefined;
    this.requests.push({ method, path, body });
    const [status, payload] = this.route(method, path, body);
    const text = typeof payload === "string" ? payload : JSON.stringify(payload);
    return { status, text: async () => text };
  };

  private route(method: string, path: string, body: any): [number, unknown] {
    if (method === "POST" && path === "/classify") {
      return this.classify(body.rule);
    }
    if (method === "GET" && path === "/triage") {
      return [200, { items: this.pending() }];
    }
    const labelMatch = path.match(/^\/triage\/([^/]+)\/label$/);
    if (method === "POST" && labelMatch) {
      return this.label(labelMatch[1], body.label);
    }
    if (method === "POST" && path === "/retrain") {
      this.retrainCount += 1;
      this.trainedOn = this.baseTrainedOn + this.labeledCount;
      this.trainedAt += 1;
      this.refreshArc();
      return [
        200,
        {
          trained_on: this.trainedOn,
          trained_at: this.trainedAt,
          model_kind: "mlp",
          layout: "mcf",
        },
      ];
    }
    if (method === "GET" && path === "/report") {
      return [
        200,
        {
          balanced_accuracy: 0.9,
          balanced_accuracy_std: 0.02,
          au_arc: 0.87,
          au_arc_std: 0.01,
          arc: this.arcPoints,
          trained_on: this.trainedOn,
          trained_at: this.trainedAt,
          tau: this.tau,
          classes: ["high", "low", "medium"],
          class_counts: { low: 30, medium: 12, high: 8 },
        },
      ];
    }
    if (method === "GET" && path === "/arc") {
      const rows = this.arcPoints.map(([r, a]) => `${r},${a}`).join("\n");
      return [200, `rejection_rate,accuracy\n${rows}\n`];
    }
    return [404, { detail: `no route ${method} ${path}` }];
  }

  private classify(rule: string): [number, unknown] {
    if (!rule.includes("(")) {
      return [400, { detail: "unparseable rule" }];
    }
    const top = Math.max(...Object.values(this.scores));
    if (top >= this.tau) {
      return [
        200,
        {
          status: "classified",
          label: "low",
          top_score: top,
          scores: this.scores,
          ensemble_score_std: 0.05,
          tau: this.tau,
        },
      ];
    }
    const item: TriageItem = {
      id: `t-${String(this.counter++).padStart(6, "0")}`,
      rule,
      ref_text: "advisory text",
      per_class_scores: this.scores,
      top_score: top,
      ensemble_score_std: 0.05,
      status: "pending",
      created_at: this.trainedAt + this.counter,
      assigned_label: null,
      labeled_at: null,
    };
    this.items.set(item.id, item);
    this.order.push(item.id);
    return [
      200,
      {
        status: "rejected",
        label: null,
        top_score: top,
        scores: this.scores,
        ensemble_score_std: 0.05,
        tau: this.tau,
        triage_id: item.id,
      },
    ];
  }

  private label(id: string, label: string): [number, unknown] {
    if (!LABELS.includes(label)) {
      return [400, { detail: `label must be one of ${LABELS.join(", ")}` }];
    }
    const item = this.items.get(id);
    if (!item) return [404, { detail: "unknown triage id" }];
    if (item.status === "labeled") return [409, { detail: "item already labeled" }];
    item.status = "labeled";
    item.assigned_label = label;
    item.labeled_at = this.trainedAt + this.counter;
    this.labeledCount += 1;
    return [200, item];
  }
}
