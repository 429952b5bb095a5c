import { describe, expect, it } from "vitest";

import { ConsoleStore, EVENT_RING_CAPACITY } from "../src/state.js";
import type { MonitorEvent } from "../src/types.js";

function event(seq: number, kind: MonitorEvent["kind"] = "input", payload: Record<string, unknown> = {}): MonitorEvent {
  return { seq, t_ms: seq * 10, kind, payload };
}

describe("event ring", () => {
  it("keeps the last 500 events under a 1000-event burst", () => {
    const store = new ConsoleStore();
    for (let i = 1; i <= 1000; i += 1) {
      store.applyMonitorEvent(event(i));
    }
    expect(store.current.events.length).toBe(EVENT_RING_CAPACITY);
    expect(store.current.events[0].seq).toBe(501);
    expect(store.current.events.at(-1)?.seq).toBe(1000);
  });

  it("never exceeds capacity at any point", () => {
    const store = new ConsoleStore();
    for (let i = 1; i <= 1200; i += 1) {
      store.applyMonitorEvent(event(i));
      expect(store.current.events.length).toBeLessThanOrEqual(EVENT_RING_CAPACITY);
    }
  });

  it("clear empties events and positions", () => {
    const store = new ConsoleStore();
    store.applyMonitorEvent(event(1, "input", { type: "position", persons: [{ id: 1, x: 10, y: 20 }] }));
    store.clearEvents();
    expect(store.current.events).toEqual([]);
    expect(store.current.positions.size).toBe(0);
  });
});

describe("stage positions", () => {
  it("tracks the latest position frame", () => {
    const store = new ConsoleStore();
    store.applyMonitorEvent(
      event(1, "input", { type: "position", persons: [{ id: 1, x: 10, y: 20 }, { id: 2, x: 30, y: 40 }] }),
    );
    store.applyMonitorEvent(event(2, "input", { type: "position", persons: [{ id: 1, x: 11, y: 21 }] }));
    expect(store.current.positions.get(1)).toEqual({ id: 1, x: 11, y: 21 });
    // person 2 left the latest frame: dot disappears
    expect(store.current.positions.has(2)).toBe(false);
  });

  it("ignores non-position inputs", () => {
    const store = new ConsoleStore();
    store.applyMonitorEvent(event(1, "input", { type: "speech", transcript: "hi" }));
    expect(store.current.positions.size).toBe(0);
  });
});

describe("pending indicators", () => {
  it("tracks begin/end per key", () => {
    const store = new ConsoleStore();
    store.beginPending("memory:3");
    expect(store.current.pending.has("memory:3")).toBe(true);
    store.endPending("memory:3");
    expect(store.current.pending.size).toBe(0);
  });
});

describe("subscriptions", () => {
  it("notifies on every change and supports unsubscribe", () => {
    const store = new ConsoleStore();
    let seen = 0;
    const unsubscribe = store.subscribe(() => {
      seen += 1;
    });
    store.setError("x");
    store.setError(null);
    unsubscribe();
    store.setError("y");
    expect(seen).toBe(2);
  });
});
