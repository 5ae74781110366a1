/** Pure HTML renderers: state in, markup out.  No fetching, no truth. */

import { polylinePoints, type ArcPoint, type ChartFrame } from "./arc.js";
import { splitRule } from "./ruleView.js";
import type { AppState, Notice } from "./controller.js";
import { LABELS, type TriageItem } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderNotice(notice: Notice | null): string {
  if (!notice) return "";
  if (notice.kind === "connectivity") {
    return `<div class="banner banner-offline" role="alert">Service unreachable — retrying will resume when it is back.</div>`;
  }
  const cls = notice.kind === "conflict" ? "toast toast-conflict" : "toast";
  return `<div class="${cls}" role="status">${escapeHtml(notice.message)}</div>`;
}

export function renderQueue(state: AppState): string {
  const items = state.queue;
  if (items.length === 0) {
    return `<div class="empty-state">Queue is empty — item count 0</div>`;
  }
  const rows = items
    .map((item) => {
      const selected = item.id === state.selectedId ? " selected" : "";
      const preview = escapeHtml(item.rule.slice(0, 80));
      return (
        `<li class="queue-row${selected}" data-action="select" data-id="${item.id}">` +
        `<span class="queue-id">${item.id}</span>` +
        `<span class="queue-score">top ${item.top_score.toFixed(3)}</span>` +
        `<span class="queue-rule">${preview}</span></li>`
      );
    })
    .join("");
  return `<div class="queue-count">${items.length} pending</div><ul class="queue">${rows}</ul>`;
}

/**
 * Horizontal score bars in the service's class order with the rejection
 * threshold drawn as a vertical line; the ensemble's score spread, when
 * the service provides it, becomes an error bar on the top-scoring bar.
 */
export function renderScoreChart(
  scores: Record<string, number>,
  tau: number,
  classOrder: string[],
  scoreStd: number | null,
): string {
  const order = classOrder.filter((c) => c in scores);
  for (const c of Object.keys(scores).sort()) {
    if (!order.includes(c)) order.push(c);
  }
  const values = order.map((c) => scores[c]);
  const scale = Math.max(1, Number.isFinite(tau) ? tau : 0, ...values);
  const topClass = order[values.indexOf(Math.max(...values))];
  const bars = order
    .map((cls) => {
      const frac = Math.max(0, scores[cls] / scale);
      const isTop = cls === topClass && scoreStd !== null;
      const err = isTop
        ? `<span class="error-bar" style="left:${pct(Math.max(0, (scores[cls] - scoreStd!) / scale))};width:${pct((2 * scoreStd!) / scale)}"></span>`
        : "";
      return (
        `<div class="score-row" data-class="${escapeHtml(cls)}">` +
        `<span class="score-label">${escapeHtml(cls)}</span>` +
        `<span class="score-track"><span class="score-bar" style="width:${pct(frac)}"></span>${err}</span>` +
        `<span class="score-value">${scores[cls].toFixed(4)}</span></div>`
      );
    })
    .join("");
  const tauLine = Number.isFinite(tau)
    ? `<div class="tau-line" style="left:${pct(tau / scale)}" title="τ = ${tau}"></div>`
    : "";
  return `<div class="score-chart">${bars}${tauLine}</div>`;
}

function pct(fraction: number): string {
  return `${Math.round(fraction * 10000) / 100}%`;
}

export function renderDetail(
  item: TriageItem | null,
  tau: number,
  classOrder: string[],
): string {
  if (!item) {
    return `<div class="empty-state">No item selected</div>`;
  }
  const elements = splitRule(item.rule);
  const panels: string[] = [];
  if (elements) {
    const ft = elements.fiveTuple;
    panels.push(
      panel(
        "Five-tuple",
        `<code>${escapeHtml(
          `${ft.protocol} ${ft.srcAddr}:${ft.srcPort} ${ft.direction} ${ft.dstAddr}:${ft.dstPort}`,
        )}</code>`,
      ),
    );
    if (elements.msg !== null) panels.push(panel("Message", escapeHtml(elements.msg)));
    if (elements.classtype !== null)
      panels.push(panel("Classtype", escapeHtml(elements.classtype)));
    if (elements.metadata.length > 0)
      panels.push(panel("Metadata", escapeHtml(elements.metadata.join("; "))));
    if (elements.references.length > 0) {
      const refs = elements.references
        .map((r) => `<li><code>${escapeHtml(r)}</code></li>`)
        .join("");
      const enriched = item.ref_text
        ? `<blockquote class="ref-text">${escapeHtml(item.ref_text)}</blockquote>`
        : `<span class="muted">no advisory text resolved</span>`;
      panels.push(panel("References", `<ul>${refs}</ul>${enriched}`));
    }
  } else {
    panels.push(panel("Raw rule", `<code>${escapeHtml(item.rule)}</code>`));
  }
  const buttons = LABELS.map(
    (label, i) =>
      `<button data-action="label" data-label="${label}">${label} <kbd>${i + 1}</kbd></button>`,
  ).join("");
  return (
    `<div class="detail" data-id="${item.id}">` +
    panels.join("") +
    panel("Scores", renderScoreChart(item.per_class_scores, tau, classOrder, item.ensemble_score_std)) +
    `<div class="label-buttons">${buttons}<button data-action="next">next <kbd>n</kbd></button></div>` +
    `</div>`
  );
}

function panel(title: string, body: string): string {
  return `<section class="panel"><h3>${title}</h3><div>${body}</div></section>`;
}

export const ARC_FRAME: ChartFrame = { width: 420, height: 300, pad: 30 };

export function renderArcChart(points: ArcPoint[], frame: ChartFrame = ARC_FRAME): string {
  if (points.length === 0) {
    return `<div class="empty-state">No curve yet</div>`;
  }
  return (
    `<svg class="arc-chart" viewBox="0 0 ${frame.width} ${frame.height}">` +
    `<rect x="${frame.pad}" y="${frame.pad}" width="${frame.width - 2 * frame.pad}" height="${frame.height - 2 * frame.pad}" class="arc-frame"/>` +
    `<polyline class="arc-line" fill="none" points="${polylinePoints(points, frame)}"/>` +
    `<text x="${frame.width / 2}" y="${frame.height - 6}" text-anchor="middle">rejection rate</text>` +
    `</svg>`
  );
}

export function renderDashboard(state: AppState, stale: boolean): string {
  const report = state.report;
  if (!report) {
    return `<div class="empty-state">No evaluation report yet</div>`;
  }
  const counts = Object.entries(report.class_counts ?? {})
    .map(([cls, n]) => `<li><span>${escapeHtml(cls)}</span><strong>${n}</strong></li>`)
    .join("");
  const staleBadge = stale
    ? `<span class="stale-badge" title="report predates the last retrain">stale</span>`
    : "";
  return (
    `<div class="dashboard">` +
    `<div class="dash-figures">${staleBadge}` +
    `<div class="figure"><span class="figure-name">AU-ARC</span><span class="figure-value">${report.au_arc.toFixed(4)}</span></div>` +
    `<div class="figure"><span class="figure-name">balanced accuracy</span><span class="figure-value">${report.balanced_accuracy.toFixed(4)}</span></div>` +
    `<div class="figure"><span class="figure-name">trained on</span><span class="figure-value">${report.trained_on}</span></div>` +
    `<div class="figure"><span class="figure-name">τ</span><span class="figure-value">${report.tau}</span></div>` +
    `</div>` +
    `<ul class="class-counts">${counts}</ul>` +
    renderArcChart(state.arc) +
    `<button data-action="retrain">Retrain now</button>` +
    `</div>`
  );
}

export function renderApp(state: AppState, stale: boolean): string {
  const nav =
    `<nav>` +
    `<button data-action="nav-queue"${state.screen === "queue" ? ' class="active"' : ""}>Queue</button>` +
    `<button data-action="nav-dashboard"${state.screen === "dashboard" ? ' class="active"' : ""}>Dashboard</button>` +
    `</nav>`;
  const tau = state.report?.tau ?? NaN;
  const classOrder = state.report?.classes ?? [];
  const main =
    state.screen === "queue"
      ? `<div class="split">${renderQueue(state)}${renderDetail(
          state.queue.find((i) => i.id === state.selectedId) ?? null,
          tau,
          classOrder,
        )}</div>`
      : renderDashboard(state, stale);
  return `${renderNotice(state.notice)}${nav}<main>${main}</main>`;
}
