/**
 * Sound view: the eight cue pads (trigger/stop) plus a per-cue editor for
 * file, device, gain and gate settings. Cue audio comes from files in the
 * scene; edits go through PUT /scene, playback through the cue endpoints.
 */

import { el } from "../dom.js";
import { MAX_CUE_SLOTS } from "../limits.js";
import type { ConsoleSession } from "../session.js";
import type { ConsoleState } from "../state.js";
import type { CueDoc } from "../types.js";

let editingSlot: number | null = null;

function cueEditor(state: ConsoleState, session: ConsoleSession, slot: number): HTMLElement {
  const scene = state.scene;
  const existing: CueDoc | undefined = scene?.cues[String(slot)];
  const draft: CueDoc = existing
    ? JSON.parse(JSON.stringify(existing))
    : { file: "", device: "default", gain_db: 0, gate_on_load: false };

  const fileInput = el("input", { type: "text", placeholder: "clip.wav", value: draft.file });
  const deviceInput = el("input", { type: "text", value: draft.device });
  const gainInput = el("input", { type: "number", step: "0.5", value: String(draft.gain_db) });
  const gateToggle = el("input", { type: "checkbox" });
  (gateToggle as HTMLInputElement).checked = draft.gate !== undefined;
  const thresholdInput = el("input", { type: "number", step: "1", value: String(draft.gate?.threshold_db ?? -40) });

  const apply = () => {
    if (!scene) {
      return;
    }
    const file = (fileInput as HTMLInputElement).value.trim();
    if (!file) {
      session.store.setError("cue needs a file path (WAV, relative to the scene file)");
      return;
    }
    const threshold = Number((thresholdInput as HTMLInputElement).value);
    if ((gateToggle as HTMLInputElement).checked && !(threshold < 0)) {
      session.store.setError("gate threshold must be negative dBFS");
      return;
    }
    const next = JSON.parse(JSON.stringify(scene));
    next.cues[String(slot)] = {
      file,
      device: (deviceInput as HTMLInputElement).value.trim() || "default",
      gain_db: Number((gainInput as HTMLInputElement).value) || 0,
      ...((gateToggle as HTMLInputElement).checked
        ? { gate: { threshold_db: threshold, attack_ms: 5, release_ms: 50, window_ms: 10 } }
        : {}),
      gate_on_load: false,
    };
    editingSlot = null;
    void session.dispatch(`cue:${slot}:load`, () => session.api.putScene(next));
  };

  return el(
    "div",
    { class: "cue-editor" },
    el("h3", {}, `Cue ${slot}`),
    el("label", {}, "file ", fileInput),
    el("label", {}, "device ", deviceInput),
    el("label", {}, "gain dB ", gainInput),
    el("label", {}, "gate ", gateToggle, " threshold ", thresholdInput),
    el(
      "div",
      { class: "editor-actions" },
      el("button", { onclick: apply }, "load into scene"),
      el("button", { onclick: () => { editingSlot = null; session.store.setError(null); } }, "cancel"),
    ),
  );
}

export function renderSound(container: HTMLElement, state: ConsoleState, session: ConsoleSession): void {
  const scene = state.scene;
  const playback = state.status?.playback ?? {};
  const pads: HTMLElement[] = [];
  for (let slot = 1; slot <= MAX_CUE_SLOTS; slot += 1) {
    const cue = scene?.cues[String(slot)];
    const playing = playback[String(slot)] === "playing";
    const pendingKey = `cue:${slot}`;
    pads.push(
      el(
        "div",
        {
          class: `cue-pad ${cue ? "loaded" : "empty"} ${playing ? "playing" : ""} ${
            state.pending.has(pendingKey) ? "pending" : ""
          }`,
        },
        el("div", { class: "pad-slot" }, String(slot)),
        el("div", { class: "pad-file" }, cue ? cue.file : "—"),
        el("div", { class: "pad-device" }, cue ? `→ ${cue.device}` : ""),
        el(
          "div",
          { class: "pad-actions" },
          el(
            "button",
            {
              disabled: !cue,
              onclick: () => void session.dispatch(pendingKey, () => session.api.triggerCue(slot), false),
            },
            "play",
          ),
          el(
            "button",
            {
              onclick: () => void session.dispatch(pendingKey, () => session.api.stopCue(slot), false),
            },
            "stop",
          ),
          el("button", { onclick: () => { editingSlot = slot; session.store.setError(null); } }, "edit"),
        ),
      ),
    );
  }

  container.append(
    el("h2", {}, "Sound cues"),
    el(
      "p",
      { class: "hint" },
      "Eight slots; play restarts from the top. Edit assigns a WAV file, output device, gain and noise gate.",
    ),
    el("div", { class: "cue-grid" }, ...pads),
  );
  if (editingSlot !== null) {
    container.append(cueEditor(state, session, editingSlot));
  }
}
