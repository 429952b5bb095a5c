/**
 * Lights view: the 20-tile memory grid plus per-lamp HSB sliders feeding
 * "save". The grid always renders all 20 tiles; unpopulated ones are
 * dimmed. Save posts the slider values; recall fires the stored memory.
 */

import { el } from "../dom.js";
import { MAX_MEMORIES, validLampState } from "../limits.js";
import type { ConsoleSession } from "../session.js";
import type { ConsoleState } from "../state.js";
import type { LampState } from "../types.js";

const sliderState = new Map<string, LampState>();
let labelDraft = "";

function lampIds(state: ConsoleState): string[] {
  const ids = new Set<string>();
  const scene = state.scene;
  if (scene) {
    for (const memory of Object.values(scene.light_memories)) {
      for (const lamp of Object.keys(memory.states)) {
        ids.add(lamp);
      }
    }
  }
  if (ids.size === 0) {
    ["lamp-a", "lamp-b", "lamp-c"].forEach((lamp) => ids.add(lamp));
  }
  return [...ids].sort();
}

function sliders(state: ConsoleState): HTMLElement {
  const rows = lampIds(state).map((lamp) => {
    const current = sliderState.get(lamp) ?? { on: true, brightness: 100, hue: 0, saturation: 100 };
    sliderState.set(lamp, current);

    const slider = (
      label: string,
      min: number,
      max: number,
      value: number,
      apply: (v: number) => void,
    ) => {
      const input = el("input", {
        type: "range",
        min: String(min),
        max: String(max),
        step: "1",
        value: String(value),
      });
      const readout = el("span", { class: "readout" }, String(value));
      input.addEventListener("input", () => {
        apply(Number(input.value));
        readout.textContent = input.value;
      });
      return el("label", { class: "slider" }, label, input, readout);
    };

    const onToggle = el("input", { type: "checkbox" });
    (onToggle as HTMLInputElement).checked = current.on;
    onToggle.addEventListener("change", () => {
      current.on = (onToggle as HTMLInputElement).checked;
    });

    return el(
      "div",
      { class: "lamp-row" },
      el("span", { class: "lamp-name" }, lamp),
      el("label", { class: "slider" }, "on", onToggle),
      slider("bri", 0, 100, current.brightness, (v) => (current.brightness = v)),
      slider("hue", 0, 359, current.hue, (v) => (current.hue = v)),
      slider("sat", 0, 100, current.saturation, (v) => (current.saturation = v)),
    );
  });
  return el("div", { class: "lamp-sliders" }, ...rows);
}

export function renderLights(container: HTMLElement, state: ConsoleState, session: ConsoleSession): void {
  const scene = state.scene;
  const tiles: HTMLElement[] = [];
  for (let index = 1; index <= MAX_MEMORIES; index += 1) {
    const memory = scene?.light_memories[String(index)];
    const pendingKey = `memory:${index}`;
    const tile = el(
      "div",
      { class: `memory-tile ${memory ? "saved" : "empty"} ${state.pending.has(pendingKey) ? "pending" : ""}` },
      el("div", { class: "tile-index" }, String(index)),
      el("div", { class: "tile-label" }, memory ? memory.label || "(unnamed)" : "—"),
      el(
        "div",
        { class: "tile-actions" },
        el(
          "button",
          {
            onclick: () => {
              const states: Record<string, LampState> = {};
              for (const [lamp, lampState] of sliderState) {
                const problem = validLampState(lampState);
                if (problem) {
                  session.store.setError(`${lamp}: ${problem}`);
                  return;
                }
                states[lamp] = { ...lampState };
              }
              void session.dispatch(pendingKey, () =>
                session.api.saveMemory(index, { label: labelDraft, states }),
              );
            },
          },
          "save",
        ),
        el(
          "button",
          {
            disabled: !memory,
            onclick: () => {
              void session.dispatch(pendingKey, () => session.api.recallMemory(index), false);
            },
          },
          "recall",
        ),
      ),
    );
    if (memory) {
      tile.title = Object.entries(memory.states)
        .map(([lamp, s]) => `${lamp}: ${s.on ? "on" : "off"} bri ${s.brightness} hue ${s.hue} sat ${s.saturation}`)
        .join("\n");
    }
    tiles.push(tile);
  }

  const label = el("input", {
    type: "text",
    placeholder: "memory label",
    value: labelDraft,
  });
  label.addEventListener("input", () => {
    labelDraft = (label as HTMLInputElement).value;
  });

  container.append(
    el("h2", {}, "Light memories"),
    el("p", { class: "hint" }, "Set the lamp sliders, then save into a tile. Recall sends the stored state to the bridge."),
    sliders(state),
    el("div", { class: "memory-label-row" }, label),
    el("div", { class: "memory-grid" }, ...tiles),
  );
}
