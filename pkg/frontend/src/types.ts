/**
 * Wire types mirroring the engine's control API (JSON structural forms).
 * The console never invents state: everything here is what GET /status,
 * GET /scene and the /events stream deliver.
 */

export interface EngineStatus {
  running: boolean;
  scene: string;
  counts: { flows: number; memories: number; cues: number; gesture_templates: number };
  endpoints: {
    osc: { host: string; port: number };
    control: { host: string; port: number } | null;
    bridge: string;
  };
  clock: string;
  uptime_s: number;
  playback: Record<string, "idle" | "playing">;
  counters: Record<string, number>;
}

export interface LampState {
  on: boolean;
  brightness: number;
  hue: number;
  saturation: number;
}

export interface LightMemoryDoc {
  label: string;
  states: Record<string, LampState>;
}

export interface GateDoc {
  threshold_db: number;
  attack_ms: number;
  release_ms: number;
  window_ms: number;
}

export interface CueDoc {
  file: string;
  device: string;
  gain_db: number;
  gate?: GateDoc;
  gate_on_load: boolean;
}

export interface GestureTemplateDoc {
  name: string;
  landmarks: [number, number, number];
  target_angle: number;
  tolerance_deg: number;
  hold_frames: number;
}

export type TriggerDoc =
  | { gesture: string }
  | { phrase: string }
  | { emotion: string }
  | { near: { x: number; y: number; radius: number; person?: number } }
  | { distance_below: { threshold: number; pair?: [number, number] } }
  | { distance_above: { threshold: number; pair?: [number, number] } };

export type ActionDoc =
  | { recall_memory: number }
  | { play_cue: number }
  | { stop_cue: number }
  | { emit_osc: { address: string; args: unknown[] } };

export interface FlowDoc {
  id: string;
  when: TriggerDoc;
  then: ActionDoc[];
  cooldown_ms: number;
  enabled: boolean;
}

export interface SceneDoc {
  schema_version: number;
  name: string;
  input: {
    frame_width: number;
    frame_height: number;
    emotion_labels: string[];
    record_landmarks: [number, number, number];
  };
  gesture_templates: GestureTemplateDoc[];
  flows: FlowDoc[];
  light_memories: Record<string, LightMemoryDoc>;
  cues: Record<string, CueDoc>;
}

export type MonitorKind = "input" | "flow_fired" | "output" | "error";

export interface MonitorEvent {
  seq: number;
  t_ms: number;
  kind: MonitorKind;
  payload: Record<string, unknown>;
}

export interface PersonDot {
  id: number;
  x: number;
  y: number;
}
