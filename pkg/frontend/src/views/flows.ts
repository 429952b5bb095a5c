/**
 * Flows view: the rule list with enable toggles plus a form-based editor
 * for adding a flow (trigger kind, its fields, one action). Edits land
 * through PUT /scene; toggles use the dedicated endpoint.
 */

import { el } from "../dom.js";
import { validCooldown, validCueSlot, validMemoryIndex, validThreshold, validZone } from "../limits.js";
import type { ConsoleSession } from "../session.js";
import type { ConsoleState } from "../state.js";
import type { ActionDoc, FlowDoc, SceneDoc, TriggerDoc } from "../types.js";

let showEditor = false;

function describeTrigger(when: TriggerDoc): string {
  if ("gesture" in when) return `gesture "${when.gesture}"`;
  if ("phrase" in when) return `phrase "${when.phrase}"`;
  if ("emotion" in when) return `emotion "${when.emotion}"`;
  if ("near" in when) {
    const p = when.near.person !== undefined ? `person ${when.near.person}` : "anyone";
    return `${p} within ${when.near.radius} of (${when.near.x}, ${when.near.y})`;
  }
  if ("distance_below" in when) {
    return `pair ${when.distance_below.pair?.join("-") ?? "any"} closer than ${when.distance_below.threshold}`;
  }
  return `pair ${when.distance_above.pair?.join("-") ?? "any"} farther than ${when.distance_above.threshold}`;
}

function describeAction(action: ActionDoc): string {
  if ("recall_memory" in action) return `recall memory ${action.recall_memory}`;
  if ("play_cue" in action) return `play cue ${action.play_cue}`;
  if ("stop_cue" in action) return `stop cue ${action.stop_cue}`;
  return `emit ${action.emit_osc.address}`;
}

function flowRow(flow: FlowDoc, state: ConsoleState, session: ConsoleSession): HTMLElement {
  const pendingKey = `flow:${flow.id}`;
  const toggle = el("input", { type: "checkbox" });
  (toggle as HTMLInputElement).checked = flow.enabled;
  toggle.addEventListener("change", () => {
    void session.dispatch(pendingKey, () =>
      session.api.setFlowEnabled(flow.id, (toggle as HTMLInputElement).checked),
    );
  });
  return el(
    "div",
    { class: `flow-row ${flow.enabled ? "" : "disabled"} ${state.pending.has(pendingKey) ? "pending" : ""}` },
    el("label", { class: "flow-toggle" }, toggle),
    el("span", { class: "flow-id" }, flow.id),
    el("span", { class: "flow-when" }, `if ${describeTrigger(flow.when)}`),
    el("span", { class: "flow-then" }, `then ${flow.then.map(describeAction).join(", ")}`),
    el("span", { class: "flow-cooldown" }, `${flow.cooldown_ms} ms`),
  );
}

interface EditorFields {
  id: HTMLInputElement;
  triggerKind: HTMLSelectElement;
  gestureName: HTMLSelectElement;
  phrase: HTMLInputElement;
  emotion: HTMLSelectElement;
  x: HTMLInputElement;
  y: HTMLInputElement;
  radius: HTMLInputElement;
  threshold: HTMLInputElement;
  actionKind: HTMLSelectElement;
  actionIndex: HTMLInputElement;
  oscAddress: HTMLInputElement;
  cooldown: HTMLInputElement;
}

export function buildFlow(fields: {
  id: string;
  triggerKind: string;
  gestureName: string;
  phrase: string;
  emotion: string;
  x: number;
  y: number;
  radius: number;
  threshold: number;
  actionKind: string;
  actionIndex: number;
  oscAddress: string;
  cooldown: number;
}): { flow?: FlowDoc; problem?: string } {
  if (!fields.id.trim()) {
    return { problem: "flow needs an id" };
  }
  let when: TriggerDoc;
  switch (fields.triggerKind) {
    case "gesture":
      if (!fields.gestureName) return { problem: "pick a gesture template" };
      when = { gesture: fields.gestureName };
      break;
    case "phrase":
      if (!fields.phrase.trim()) return { problem: "phrase must be non-empty" };
      when = { phrase: fields.phrase.trim() };
      break;
    case "emotion":
      if (!fields.emotion) return { problem: "pick an emotion label" };
      when = { emotion: fields.emotion };
      break;
    case "near": {
      const zone = { x: fields.x, y: fields.y, radius: fields.radius };
      const problem = validZone(zone);
      if (problem) return { problem };
      when = { near: zone };
      break;
    }
    case "distance_below":
    case "distance_above": {
      const problem = validThreshold(fields.threshold);
      if (problem) return { problem };
      when =
        fields.triggerKind === "distance_below"
          ? { distance_below: { threshold: fields.threshold } }
          : { distance_above: { threshold: fields.threshold } };
      break;
    }
    default:
      return { problem: `unknown trigger kind ${fields.triggerKind}` };
  }

  let action: ActionDoc;
  switch (fields.actionKind) {
    case "recall_memory":
      if (!validMemoryIndex(fields.actionIndex)) return { problem: "memory index must be 1..20" };
      action = { recall_memory: fields.actionIndex };
      break;
    case "play_cue":
      if (!validCueSlot(fields.actionIndex)) return { problem: "cue slot must be 1..8" };
      action = { play_cue: fields.actionIndex };
      break;
    case "stop_cue":
      if (!validCueSlot(fields.actionIndex)) return { problem: "cue slot must be 1..8" };
      action = { stop_cue: fields.actionIndex };
      break;
    case "emit_osc":
      if (!fields.oscAddress.startsWith("/")) return { problem: "OSC address must start with /" };
      action = { emit_osc: { address: fields.oscAddress, args: [] } };
      break;
    default:
      return { problem: `unknown action kind ${fields.actionKind}` };
  }

  const cooldownProblem = validCooldown(fields.cooldown);
  if (cooldownProblem) return { problem: cooldownProblem };

  return {
    flow: { id: fields.id.trim(), when, then: [action], cooldown_ms: fields.cooldown, enabled: true },
  };
}

function editor(state: ConsoleState, session: ConsoleSession): HTMLElement {
  const scene = state.scene as SceneDoc;
  const option = (value: string, text?: string) => {
    const node = el("option", { value });
    node.textContent = text ?? value;
    return node;
  };
  const select = (options: string[]) => {
    const node = el("select", {});
    options.forEach((o) => node.append(option(o)));
    return node;
  };
  const num = (value: string, step = "1") => el("input", { type: "number", value, step });

  const fields: EditorFields = {
    id: el("input", { type: "text", placeholder: "f3" }),
    triggerKind: select(["gesture", "near", "distance_below", "distance_above", "phrase", "emotion"]),
    gestureName: select(scene.gesture_templates.map((t) => t.name)),
    phrase: el("input", { type: "text", placeholder: "open the door" }),
    emotion: select(scene.input.emotion_labels),
    x: num("50"),
    y: num("50"),
    radius: num("5"),
    threshold: num("30"),
    actionKind: select(["recall_memory", "play_cue", "stop_cue", "emit_osc"]),
    actionIndex: num("1"),
    oscAddress: el("input", { type: "text", placeholder: "/door/open" }),
    cooldown: num("1000", "100"),
  };

  const submit = () => {
    const result = buildFlow({
      id: fields.id.value,
      triggerKind: fields.triggerKind.value,
      gestureName: fields.gestureName.value,
      phrase: fields.phrase.value,
      emotion: fields.emotion.value,
      x: Number(fields.x.value),
      y: Number(fields.y.value),
      radius: Number(fields.radius.value),
      threshold: Number(fields.threshold.value),
      actionKind: fields.actionKind.value,
      actionIndex: Number(fields.actionIndex.value),
      oscAddress: fields.oscAddress.value,
      cooldown: Number(fields.cooldown.value),
    });
    if (result.problem !== undefined || result.flow === undefined) {
      session.store.setError(result.problem ?? "invalid flow");
      return;
    }
    const flow = result.flow;
    if (scene.flows.some((f) => f.id === flow.id)) {
      session.store.setError(`flow id ${flow.id} already exists`);
      return;
    }
    const next: SceneDoc = JSON.parse(JSON.stringify(scene));
    next.flows.push(flow);
    showEditor = false;
    void session.dispatch("flow:add", () => session.api.putScene(next));
  };

  return el(
    "div",
    { class: "flow-editor" },
    el("h3", {}, "New flow"),
    el("label", {}, "id ", fields.id),
    el("label", {}, "trigger ", fields.triggerKind),
    el("label", {}, "gesture ", fields.gestureName),
    el("label", {}, "phrase ", fields.phrase),
    el("label", {}, "emotion ", fields.emotion),
    el("label", {}, "x ", fields.x, " y ", fields.y, " radius ", fields.radius),
    el("label", {}, "distance threshold ", fields.threshold),
    el("label", {}, "action ", fields.actionKind),
    el("label", {}, "memory/cue number ", fields.actionIndex),
    el("label", {}, "osc address ", fields.oscAddress),
    el("label", {}, "cooldown ms ", fields.cooldown),
    el(
      "div",
      { class: "editor-actions" },
      el("button", { onclick: submit }, "add flow"),
      el("button", { onclick: () => { showEditor = false; session.store.setError(null); } }, "cancel"),
    ),
  );
}

export function renderFlows(container: HTMLElement, state: ConsoleState, session: ConsoleSession): void {
  const scene = state.scene;
  container.append(
    el("h2", {}, "Flows"),
    el("p", { class: "hint" }, "Each row is one rule: if the trigger goes true, the actions run (edge-triggered, per-flow cooldown)."),
  );
  if (!scene) {
    container.append(el("p", {}, "no scene loaded"));
    return;
  }
  container.append(el("div", { class: "flow-list" }, ...scene.flows.map((f) => flowRow(f, state, session))));
  if (scene.flows.length === 0) {
    container.append(el("p", { class: "hint" }, "scene has no flows yet"));
  }
  if (showEditor) {
    container.append(editor(state, session));
  } else {
    container.append(el("button", { class: "add-flow", onclick: () => { showEditor = true; } }, "add flow"));
  }

  const record = el("input", { type: "text", placeholder: "gesture name" });
  container.append(
    el(
      "div",
      { class: "record-row" },
      el("h3", {}, "Record a gesture"),
      record,
      el(
        "button",
        {
          onclick: () => {
            const name = (record as HTMLInputElement).value.trim();
            if (!name) {
              session.store.setError("gesture needs a name");
              return;
            }
            void session.dispatch("gesture:record", () => session.api.recordGesture(name), false);
          },
        },
        "arm capture",
      ),
      el("span", { class: "hint" }, "the next landmark frame showing all three configured points becomes the template"),
    ),
  );
}
