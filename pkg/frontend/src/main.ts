import { ApiClient } from "./api.js";
import { TriageController } from "./controller.js";
import { renderApp } from "./views.js";
import type { Label } from "./types.js";

const QUEUE_POLL_MS = 5000;

export function mount(root: HTMLElement, baseUrl: string): TriageController {
  const api = new ApiClient(baseUrl);
  const controller = new TriageController(api, (state) => {
    root.innerHTML = renderApp(state, controller.reportIsStale());
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    switch (target.dataset.action) {
      case "select":
        controller.select(target.dataset.id!);
        break;
      case "label":
        void controller.labelSelected(target.dataset.label as Label);
        break;
      case "next":
        controller.selectNext();
        break;
      case "retrain":
        void controller.retrain();
        break;
      case "nav-queue":
        controller.showScreen("queue");
        void controller.refreshQueue();
        break;
      case "nav-dashboard":
        controller.showScreen("dashboard");
        void controller.refreshDashboard();
        break;
    }
  });

  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement) return;
    void controller.handleKey(event.key);
  });

  void controller.refreshDashboard().then(() => controller.refreshQueue());
  setInterval(() => {
    if (controller.state.screen === "queue") void controller.refreshQueue();
  }, QUEUE_POLL_MS);
  return controller;
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const baseUrl =
      new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8000";
    mount(root, baseUrl);
  }
}
