/**
 * The player page: query panel with tabs and mode selector, video panel with
 * scrubber and card overlay, control panel with skim modes, overall
 * narrative, and per-segment summary cards with the playing one highlighted.
 */

import { ApiClient } from "./api.js";
import { PlaybackDriver, type DriverState, type MediaLike, type NarrationLike } from "./driver.js";
import { Scrubber } from "./scrubber.js";
import { validatePlan } from "./timeline.js";
import type {
  PlaybackPlan,
  QueryMode,
  SegmentView,
  SessionView,
  SkimMode,
} from "./types.js";

const SKIM_LABELS: [SkimMode, string][] = [
  ["relevant_only", "Play Relevant Only"],
  ["speed2x", "Speed Up Irrelevant 2x"],
  ["speed5x", "Speed Up Irrelevant 5x"],
];

export interface TabElements {
  root: HTMLElement;
  overlay: HTMLElement;
  scrubberHost: HTMLElement;
  narrativePanel: HTMLElement;
  summaryList: HTMLElement;
  controls: HTMLElement;
  status: HTMLElement;
}

/** One query tab: owns its session, plan, driver, and panels. */
export class QueryTab {
  driver: PlaybackDriver | null = null;
  scrubber: Scrubber | null = null;
  session: SessionView | null = null;
  private summaryCards: HTMLElement[] = [];
  private segments: SegmentView[] = [];

  constructor(
    private api: ApiClient,
    private elements: TabElements,
    private video: MediaLike,
    private narration: NarrationLike,
    private scrubberWidth = 640
  ) {}

  async run(videoId: string, text: string, mode: QueryMode): Promise<SessionView> {
    this.elements.status.textContent = "retrieving…";
    const sessionId = await this.api.submitQuery(videoId, text, mode);
    const session = await this.api.waitForSession(sessionId);
    this.session = session;
    if (session.status === "failed") {
      this.elements.status.textContent = `failed at ${session.stage}: ${session.error}`;
      return session;
    }
    this.elements.status.textContent = "ready";
    this.renderNarrative(session);
    this.renderSummaries(session.segments);
    if (session.plan) this.loadPlan(session.plan);
    return session;
  }

  loadPlan(plan: PlaybackPlan): void {
    validatePlan(plan);
    this.scrubber?.destroy();
    this.driver?.stop();
    this.driver = new PlaybackDriver(plan, this.video, this.narration, {
      resolveNarrationUrl: (ref) => this.api.mediaUrl(ref),
      onItemChange: (state) => this.applyState(state),
    });
    this.scrubber = new Scrubber(
      this.elements.scrubberHost,
      plan,
      this.scrubberWidth,
      (t) => this.driver?.seekVirtual(t)
    );
    this.driver.start();
  }

  /** Host-loop tick; forwards to the driver and refreshes the panels. */
  tick(dt: number): DriverState | null {
    if (!this.driver) return null;
    const state = this.driver.advance(dt);
    this.applyState(state);
    return state;
  }

  async loadSkim(mode: SkimMode): Promise<void> {
    if (!this.session) return;
    const plan = await this.api.getSkimPlan(this.session.session_id, mode);
    this.loadPlan(plan);
  }

  private applyState(state: DriverState): void {
    this.scrubber?.setPosition(state.virtualTime);
    const overlay = this.elements.overlay;
    if (state.cardText) {
      overlay.textContent = state.cardText;
      overlay.classList.add("visible");
    } else {
      overlay.textContent = "";
      overlay.classList.remove("visible");
    }
    this.highlightSummary(state.activeSource);
  }

  private renderNarrative(session: SessionView): void {
    const panel = this.elements.narrativePanel;
    panel.textContent = session.narrative?.overall_narrative
      ?? "No narrative: nothing matched this query.";
  }

  private renderSummaries(segments: SegmentView[]): void {
    this.segments = segments;
    this.summaryCards = [];
    const list = this.elements.summaryList;
    list.textContent = "";
    for (const segment of segments) {
      const card = document.createElement("div");
      card.className = segment.relevant ? "summary-card relevant" : "summary-card";
      const title = document.createElement("strong");
      title.textContent = `${segment.title} [${segment.start.toFixed(0)}s–${segment.end.toFixed(0)}s]`;
      const body = document.createElement("p");
      body.textContent = segment.summary;
      card.append(title, body);
      list.appendChild(card);
      this.summaryCards.push(card);
    }
  }

  /** Exactly one card highlighted while a segment plays. */
  private highlightSummary(source: { start: number; end: number } | null): void {
    this.summaryCards.forEach((card, i) => {
      const segment = this.segments[i];
      const active =
        source !== null &&
        segment.start < source.end &&
        source.start < segment.end;
      card.classList.toggle("highlighted", active);
    });
  }

  renderSkimControls(onUnavailable?: (message: string) => void): void {
    const controls = this.elements.controls;
    controls.textContent = "";
    for (const [mode, label] of SKIM_LABELS) {
      const button = document.createElement("button");
      button.textContent = label;
      button.dataset.mode = mode;
      button.addEventListener("click", () => {
        this.loadSkim(mode).catch((err) => onUnavailable?.(String(err)));
      });
      controls.appendChild(button);
    }
  }
}

/** Builds the DOM shell for one tab inside the given host. */
export function buildTabElements(host: HTMLElement, label: string): TabElements {
  const root = document.createElement("section");
  root.className = "tab";
  root.dataset.label = label;

  const overlay = document.createElement("div");
  overlay.className = "card-overlay";
  const scrubberHost = document.createElement("div");
  scrubberHost.className = "scrubber-host";
  const narrativePanel = document.createElement("div");
  narrativePanel.className = "narrative-panel";
  const summaryList = document.createElement("div");
  summaryList.className = "summary-list";
  const controls = document.createElement("div");
  controls.className = "control-panel";
  const status = document.createElement("div");
  status.className = "tab-status";

  root.append(status, overlay, scrubberHost, controls, narrativePanel, summaryList);
  host.appendChild(root);
  return { root, overlay, scrubberHost, narrativePanel, summaryList, controls, status };
}

/** Entry point used by index.html; tabs share the one video element. */
export function mountApp(doc: Document, baseUrl = ""): {
  api: ApiClient;
  newTab: (label: string) => QueryTab;
} {
  const api = new ApiClient(baseUrl);
  const tabsHost = doc.getElementById("tabs") ?? doc.body;
  const video = doc.querySelector("video") as unknown as MediaLike;
  const narration = doc.getElementById("narration") as unknown as NarrationLike;

  const newTab = (label: string): QueryTab => {
    const elements = buildTabElements(tabsHost as HTMLElement, label);
    const tab = new QueryTab(api, elements, video, narration);
    tab.renderSkimControls();
    return tab;
  };
  return { api, newTab };
}
