/** A fetch-shaped fake engine holding server-side scene state. */

import type { FetchLike } from "../src/api.js";
import type { EngineStatus, SceneDoc } from "../src/types.js";

export function demoScene(): SceneDoc {
  return {
    schema_version: 1,
    name: "raised hand and chair",
    input: {
      frame_width: 640,
      frame_height: 480,
      emotion_labels: ["angry", "happy", "neutral", "sad", "surprised"],
      record_landmarks: [11, 13, 15],
    },
    gesture_templates: [
      { name: "raised_hand", landmarks: [12, 14, 16], target_angle: 170, tolerance_deg: 15, hold_frames: 3 },
    ],
    flows: [
      { id: "f1", when: { gesture: "raised_hand" }, then: [{ recall_memory: 1 }], cooldown_ms: 1000, enabled: true },
      {
        id: "f2",
        when: { near: { x: 50, y: 50, radius: 5 } },
        then: [{ play_cue: 1 }],
        cooldown_ms: 1000,
        enabled: true,
      },
    ],
    light_memories: {
      "1": { label: "lamp A red", states: { "lamp-a": { on: true, brightness: 100, hue: 0, saturation: 100 } } },
    },
    cues: { "1": { file: "chime.wav", device: "main", gain_db: 0, gate_on_load: false } },
  };
}

export class FakeEngine {
  scene: SceneDoc = demoScene();
  calls: Array<{ method: string; path: string; body?: unknown }> = [];

  status(): EngineStatus {
    return {
      running: true,
      scene: this.scene.name,
      counts: {
        flows: this.scene.flows.length,
        memories: Object.keys(this.scene.light_memories).length,
        cues: Object.keys(this.scene.cues).length,
        gesture_templates: this.scene.gesture_templates.length,
      },
      endpoints: { osc: { host: "127.0.0.1", port: 9000 }, control: { host: "127.0.0.1", port: 8765 }, bridge: "http://b" },
      clock: "wall",
      uptime_s: 1,
      playback: {},
      counters: {},
    };
  }

  readonly fetch: FetchLike = async (input, init) => {
    const url = new URL(input);
    const method = init?.method ?? "GET";
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.calls.push({ method, path, body });

    const json = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), { status, headers: { "Content-Type": "application/json" } });

    if (method === "GET" && path === "/status") return json(this.status());
    if (method === "GET" && path === "/scene") return json(this.scene);
    if (method === "PUT" && path === "/scene") {
      this.scene = body as SceneDoc;
      return json({ loaded: true, counts: this.status().counts });
    }
    const memory = path.match(/^\/memory\/(\d+)\/(save|recall)$/);
    if (method === "POST" && memory) {
      const index = Number(memory[1]);
      if (index < 1 || index > 20) {
        return json({ error: { code: "out_of_range", message: `memory index ${index}` } }, 400);
      }
      if (memory[2] === "save") {
        const save = body as { label?: string; states?: SceneDoc["light_memories"][string]["states"] };
        if (!save.states || Object.keys(save.states).length === 0) {
          return json({ error: { code: "invalid_input", message: "no states" } }, 400);
        }
        this.scene.light_memories[String(index)] = { label: save.label ?? "", states: save.states };
        return json({ saved: index, lamps: Object.keys(save.states) });
      }
      if (!this.scene.light_memories[String(index)]) {
        return json({ error: { code: "not_found", message: `memory ${index} is not saved` } }, 404);
      }
      return json({ recalled: index, commands: 1 });
    }
    const cue = path.match(/^\/cue\/(\d+)\/(trigger|stop)$/);
    if (method === "POST" && cue) {
      const slot = Number(cue[1]);
      if (slot < 1 || slot > 8) {
        return json({ error: { code: "out_of_range", message: `cue slot ${slot}` } }, 400);
      }
      if (cue[2] === "trigger" && !this.scene.cues[String(slot)]) {
        return json({ error: { code: "not_found", message: `no cue loaded in slot ${slot}` } }, 404);
      }
      return json(cue[2] === "trigger" ? { playing: slot } : { stopped: slot });
    }
    const flow = path.match(/^\/flow\/([^/]+)\/enabled$/);
    if (method === "POST" && flow) {
      const target = this.scene.flows.find((f) => f.id === decodeURIComponent(flow[1]));
      if (!target) {
        return json({ error: { code: "not_found", message: "no flow" } }, 404);
      }
      target.enabled = (body as { enabled: boolean }).enabled;
      return json({ flow_id: target.id, enabled: target.enabled });
    }
    if (method === "POST" && path === "/gesture/record") {
      return json({ armed: true, name: (body as { name: string }).name });
    }
    return json({ error: { code: "no_route", message: path } }, 404);
  };
}
