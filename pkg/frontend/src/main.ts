/**
 * Console entry point: header with connection banner and scene counts,
 * four views (flows, lights, sound, monitor), renders coalesced onto
 * animation frames so event bursts stay responsive.
 */

import { clear, el } from "./dom.js";
import { ConsoleSession } from "./session.js";
import type { ConsoleState } from "./state.js";
import { renderFlows } from "./views/flows.js";
import { renderLights } from "./views/lights.js";
import { renderMonitor } from "./views/monitor.js";
import { renderSound } from "./views/sound.js";

type ViewName = "flows" | "lights" | "sound" | "monitor";

const VIEWS: Record<ViewName, (c: HTMLElement, s: ConsoleState, session: ConsoleSession) => void> = {
  flows: renderFlows,
  lights: renderLights,
  sound: renderSound,
  monitor: renderMonitor,
};

let activeView: ViewName = (location.hash.replace("#", "") as ViewName) || "flows";
if (!(activeView in VIEWS)) {
  activeView = "flows";
}

const session = new ConsoleSession(location.origin);
const root = document.getElementById("app") as HTMLElement;

function header(state: ConsoleState): HTMLElement {
  const status = state.status;
  const counts = status
    ? `${status.counts.flows} flows · ${status.counts.memories} memories · ${status.counts.cues} cues`
    : "";
  const banner =
    state.connection === "connected"
      ? null
      : el(
          "div",
          { class: "banner" },
          state.connection === "connecting"
            ? "connecting to engine…"
            : `engine disconnected${state.retryInMs !== null ? ` — retrying in ${(state.retryInMs / 1000).toFixed(1)} s` : ""}`,
        );
  const tabs = (Object.keys(VIEWS) as ViewName[]).map((name) =>
    el(
      "button",
      {
        class: `tab ${name === activeView ? "active" : ""}`,
        onclick: () => {
          activeView = name;
          location.hash = name;
          schedule();
        },
      },
      name,
    ),
  );
  return el(
    "header",
    {},
    el(
      "div",
      { class: "title-row" },
      el("h1", {}, "stageflow console"),
      el("span", { class: "scene-name" }, status ? status.scene : "…"),
      el("span", { class: "counts" }, counts),
      el("span", { class: `dot ${state.connection}` }),
    ),
    banner,
    state.lastError ? el("div", { class: "error-bar" }, state.lastError) : null,
    el("nav", {}, ...tabs),
  );
}

let renderQueued = false;

function render(): void {
  renderQueued = false;
  const state = session.store.current;
  clear(root);
  root.append(header(state));
  const view = el("main", {});
  VIEWS[activeView](view, state, session);
  root.append(view);
}

function schedule(): void {
  if (!renderQueued) {
    renderQueued = true;
    requestAnimationFrame(render);
  }
}

session.store.subscribe(schedule);
schedule();
void session.connect();
