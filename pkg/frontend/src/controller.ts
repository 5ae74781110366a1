import { ApiClient, ApiError, ConnectivityError } from "./api.js";
import { parseArcCsv, type ArcPoint } from "./arc.js";
import type { Label, Report, TriageItem } from "./types.js";

export interface Notice {
  kind: "connectivity" | "conflict" | "info";
  message: string;
}

export interface AppState {
  screen: "queue" | "dashboard";
  queue: TriageItem[];
  selectedId: string | null;
  report: Report | null;
  arc: ArcPoint[];
  notice: Notice | null;
  lastRetrainAt: number | null;
}

/**
 * All UI behavior lives here, detached from the DOM.  Every displayed
 * fact is re-fetched from the service; nothing is authored client-side.
 */
export class TriageController {
  state: AppState = {
    screen: "queue",
    queue: [],
    selectedId: null,
    report: null,
    arc: [],
    notice: null,
    lastRetrainAt: null,
  };

  constructor(
    private api: ApiClient,
    private onChange: (state: AppState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  private handleFailure(err: unknown): void {
    if (err instanceof ConnectivityError) {
      this.state.notice = { kind: "connectivity", message: "service unreachable" };
    } else if (err instanceof ApiError && err.status === 409) {
      this.state.notice = { kind: "conflict", message: err.detail };
    } else if (err instanceof ApiError) {
      this.state.notice = { kind: "info", message: err.detail };
    } else {
      throw err;
    }
    this.emit();
  }

  /** The offline banner clears on the next successful fetch; toasts stay
   * until dismissed. */
  private clearConnectivityNotice(): void {
    if (this.state.notice?.kind === "connectivity") {
      this.state.notice = null;
    }
  }

  dismissNotice(): void {
    this.state.notice = null;
    this.emit();
  }

  showScreen(screen: "queue" | "dashboard"): void {
    this.state.screen = screen;
    this.emit();
  }

  selected(): TriageItem | null {
    return this.state.queue.find((i) => i.id === this.state.selectedId) ?? null;
  }

  async refreshQueue(): Promise<void> {
    try {
      this.state.queue = await this.api.getQueue();
      this.clearConnectivityNotice();
      if (!this.selected()) {
        this.state.selectedId = this.state.queue[0]?.id ?? null;
      }
      this.emit();
    } catch (err) {
      this.handleFailure(err);
    }
  }

  select(id: string): void {
    if (this.state.queue.some((i) => i.id === id)) {
      this.state.selectedId = id;
      this.emit();
    }
  }

  /** Move selection to the next pending item (wrapping), if any. */
  selectNext(): void {
    const ids = this.state.queue.map((i) => i.id);
    if (ids.length === 0) return;
    const at = this.state.selectedId === null ? -1 : ids.indexOf(this.state.selectedId);
    this.state.selectedId = ids[(at + 1) % ids.length];
    this.emit();
  }

  /** Label the selected item and advance to the next pending one. */
  async labelSelected(label: Label): Promise<void> {
    const item = this.selected();
    if (!item) return;
    try {
      await this.api.label(item.id, label);
      this.state.queue = this.state.queue.filter((i) => i.id !== item.id);
      this.state.selectedId = this.state.queue[0]?.id ?? null;
      this.emit();
    } catch (err) {
      this.handleFailure(err);
      if (err instanceof ApiError && err.status === 409) {
        await this.refreshQueue(); // reconcile with another labeler
      }
    }
  }

  async refreshDashboard(): Promise<void> {
    try {
      const [report, arcCsv] = await Promise.all([
        this.api.getReport(),
        this.api.getArcCsv(),
      ]);
      this.state.report = report;
      this.state.arc = parseArcCsv(arcCsv);
      this.clearConnectivityNotice();
      this.emit();
    } catch (err) {
      this.handleFailure(err);
    }
  }

  async retrain(): Promise<void> {
    try {
      const result = await this.api.retrain();
      this.state.lastRetrainAt = result.trained_at;
      this.emit();
      await this.refreshDashboard();
    } catch (err) {
      this.handleFailure(err);
    }
  }

  /** True when the shown report predates the most recent retrain. */
  reportIsStale(): boolean {
    const { report, lastRetrainAt } = this.state;
    return report !== null && lastRetrainAt !== null && report.trained_at < lastRetrainAt;
  }

  /**
   * Keyboard shortcuts route through the same methods as button clicks,
   * so they produce byte-identical requests.
   */
  async handleKey(key: string): Promise<void> {
    const byKey: Record<string, Label> = { "1": "low", "2": "medium", "3": "high" };
    if (key in byKey) {
      await this.labelSelected(byKey[key]);
    } else if (key === "n") {
      this.selectNext();
    }
  }
}

export type { Report };
