/**
 * Monitor view: the live event list (ring of the last 500, newest first)
 * and the 0-100 stage map with latest person positions and the scene's
 * position-trigger zones.
 */

import { el } from "../dom.js";
import type { ConsoleSession } from "../session.js";
import type { ConsoleState } from "../state.js";
import { drawStageMap, zonesFromScene } from "../stagemap.js";
import type { MonitorEvent, MonitorKind } from "../types.js";

const KINDS: MonitorKind[] = ["input", "flow_fired", "output", "error"];
const visibleKinds = new Set<MonitorKind>(KINDS);
const MAP_SIZE = 360;
const LIST_LIMIT = 500;

function describe(event: MonitorEvent): string {
  const p = event.payload;
  switch (event.kind) {
    case "input": {
      if (p["type"] === "gesture") return `gesture ${p["name"]} (${p["angle"]}°)`;
      if (p["type"] === "position") {
        const persons = p["persons"] as Array<{ id: number; x: number; y: number }>;
        return `positions ${persons.map((q) => `#${q.id}(${q.x},${q.y})`).join(" ")}`;
      }
      if (p["type"] === "speech") return `speech "${p["transcript"]}"`;
      if (p["type"] === "emotion") return `emotion ${p["label"]}`;
      if (p["type"] === "control") return `control ${p["command"]}`;
      if (p["type"] === "gesture_recorded") return `recorded gesture ${p["name"]} @ ${p["target_angle"]}°`;
      return JSON.stringify(p);
    }
    case "flow_fired":
      return `flow ${p["flow_id"]} fired → ${JSON.stringify(p["actions"])}`;
    case "output": {
      if (p["channel"] === "bridge") return `bridge ${p["lamp"]} ← ${JSON.stringify(p["body"])}`;
      if (p["channel"] === "audio") return `audio ${p["action"]} slot ${p["slot"]} → ${p["device"]}`;
      if (p["channel"] === "osc") return `osc ${p["address"]} ${JSON.stringify(p["args"])}`;
      return JSON.stringify(p);
    }
    case "error":
      return `${p["code"]}: ${p["message"]}`;
  }
}

export function renderMonitor(container: HTMLElement, state: ConsoleState, session: ConsoleSession): void {
  const chips = KINDS.map((kind) => {
    const checkbox = el("input", { type: "checkbox" });
    (checkbox as HTMLInputElement).checked = visibleKinds.has(kind);
    checkbox.addEventListener("change", () => {
      if ((checkbox as HTMLInputElement).checked) {
        visibleKinds.add(kind);
      } else {
        visibleKinds.delete(kind);
      }
      session.store.setError(null); // repaint via store emit
    });
    return el("label", { class: `chip chip-${kind}` }, checkbox, kind);
  });

  const canvas = el("canvas", { width: String(MAP_SIZE), height: String(MAP_SIZE), class: "stage-map" });
  const ctx = (canvas as HTMLCanvasElement).getContext("2d");
  if (ctx) {
    drawStageMap(ctx, MAP_SIZE, zonesFromScene(state.scene), state.positions.values());
  }

  const rows: HTMLElement[] = [];
  const events = state.events;
  for (let i = events.length - 1; i >= 0 && rows.length < LIST_LIMIT; i -= 1) {
    const event = events[i];
    if (!visibleKinds.has(event.kind)) {
      continue;
    }
    const row = el(
      "div",
      { class: `event-row kind-${event.kind}` },
      el("span", { class: "event-seq" }, `#${event.seq}`),
      el("span", { class: "event-kind" }, event.kind),
      el("span", { class: "event-text" }, describe(event)),
    );
    if (event.kind === "flow_fired") {
      row.title = JSON.stringify(event.payload, null, 2);
    }
    rows.push(row);
  }

  container.append(
    el("h2", {}, "Monitor"),
    el(
      "div",
      { class: "monitor-layout" },
      el(
        "div",
        { class: "monitor-side" },
        canvas,
        el("p", { class: "hint" }, "stage map: latest positions + trigger zones"),
        el("div", { class: "chips" }, ...chips),
        el("button", { onclick: () => session.store.clearEvents() }, "clear"),
      ),
      el("div", { class: "event-list" }, ...rows),
    ),
  );
}
