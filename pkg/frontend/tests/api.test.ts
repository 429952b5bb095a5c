import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeEngine } from "./helpers.js";

describe("api client", () => {
  it("each method issues exactly one request", async () => {
    const engine = new FakeEngine();
    const api = new ApiClient("http://engine", engine.fetch);
    await api.status();
    await api.getScene();
    await api.recallMemory(1);
    await api.triggerCue(1);
    await api.stopCue(1);
    await api.setFlowEnabled("f1", false);
    expect(engine.calls.map((c) => `${c.method} ${c.path}`)).toEqual([
      "GET /status",
      "GET /scene",
      "POST /memory/1/recall",
      "POST /cue/1/trigger",
      "POST /cue/1/stop",
      "POST /flow/f1/enabled",
    ]);
  });

  it("surfaces server error codes and messages", async () => {
    const engine = new FakeEngine();
    const api = new ApiClient("http://engine", engine.fetch);
    await expect(api.recallMemory(7)).rejects.toMatchObject({
      code: "not_found",
      status: 404,
    });
    await expect(api.triggerCue(5)).rejects.toMatchObject({ code: "not_found" });
  });

  it("rejects out-of-range indices client-side without any request", async () => {
    const engine = new FakeEngine();
    const api = new ApiClient("http://engine", engine.fetch);
    await expect(api.saveMemory(21, {})).rejects.toBeInstanceOf(ApiError);
    await expect(api.saveMemory(0, {})).rejects.toBeInstanceOf(ApiError);
    await expect(api.triggerCue(9)).rejects.toBeInstanceOf(ApiError);
    await expect(api.stopCue(-1)).rejects.toBeInstanceOf(ApiError);
    expect(engine.calls).toEqual([]);
  });

  it("maps network failure to an unreachable error", async () => {
    const api = new ApiClient("http://engine", () => Promise.reject(new Error("ECONNREFUSED")));
    await expect(api.status()).rejects.toMatchObject({ code: "unreachable" });
  });

  it("save then get round-trips through the fake engine", async () => {
    const engine = new FakeEngine();
    const api = new ApiClient("http://engine", engine.fetch);
    await api.saveMemory(3, {
      label: "blue",
      states: { "lamp-b": { on: true, brightness: 40, hue: 200, saturation: 60 } },
    });
    const scene = await api.getScene();
    expect(scene.light_memories["3"].label).toBe("blue");
    expect(scene.light_memories["3"].states["lamp-b"].hue).toBe(200);
  });
});
