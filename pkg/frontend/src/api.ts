/**
 * Thin client for the engine's control API. One method call is exactly
 * one HTTP request; errors carry the server's machine code and human
 * message so views can show them inline.
 */

import type { EngineStatus, LampState, SceneDoc } from "./types.js";
import { validCueSlot, validMemoryIndex } from "./limits.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError("unreachable", `engine unreachable: ${String(err)}`, 0);
    }
    let parsed: unknown;
    try {
      parsed = await response.json();
    } catch {
      throw new ApiError("bad_response", `engine answered ${response.status} with a non-JSON body`, response.status);
    }
    if (!response.ok) {
      const error = (parsed as { error?: { code?: string; message?: string } }).error;
      throw new ApiError(error?.code ?? "error", error?.message ?? `HTTP ${response.status}`, response.status);
    }
    return parsed as T;
  }

  status(): Promise<EngineStatus> {
    return this.request("GET", "/status");
  }

  getScene(): Promise<SceneDoc> {
    return this.request("GET", "/scene");
  }

  putScene(scene: SceneDoc): Promise<{ loaded: boolean; counts: Record<string, number> }> {
    return this.request("PUT", "/scene", scene);
  }

  saveMemory(
    index: number,
    body: { label?: string; states?: Record<string, LampState> },
  ): Promise<{ saved: number; lamps: string[] }> {
    if (!validMemoryIndex(index)) {
      return Promise.reject(new ApiError("out_of_range", `memory index ${index} is outside 1..20`, 0));
    }
    return this.request("POST", `/memory/${index}/save`, body);
  }

  recallMemory(index: number): Promise<{ recalled: number; commands: number }> {
    if (!validMemoryIndex(index)) {
      return Promise.reject(new ApiError("out_of_range", `memory index ${index} is outside 1..20`, 0));
    }
    return this.request("POST", `/memory/${index}/recall`);
  }

  triggerCue(slot: number): Promise<{ playing: number }> {
    if (!validCueSlot(slot)) {
      return Promise.reject(new ApiError("out_of_range", `cue slot ${slot} is outside 1..8`, 0));
    }
    return this.request("POST", `/cue/${slot}/trigger`);
  }

  stopCue(slot: number): Promise<{ stopped: number }> {
    if (!validCueSlot(slot)) {
      return Promise.reject(new ApiError("out_of_range", `cue slot ${slot} is outside 1..8`, 0));
    }
    return this.request("POST", `/cue/${slot}/stop`);
  }

  setFlowEnabled(flowId: string, enabled: boolean): Promise<{ flow_id: string; enabled: boolean }> {
    return this.request("POST", `/flow/${encodeURIComponent(flowId)}/enabled`, { enabled });
  }

  recordGesture(
    name: string,
    landmarks?: [number, number, number],
  ): Promise<{ armed: boolean; name: string }> {
    return this.request("POST", "/gesture/record", landmarks ? { name, landmarks } : { name });
  }
}
