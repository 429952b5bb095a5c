/**
 * Console state of record (client side only; the engine owns the truth).
 *
 * Holds the connection status, the mirrored scene document, a ring of the
 * last 500 monitor events, the latest person positions for the stage map
 * and per-control pending/error indicators. Views subscribe and re-render
 * on every change; a hard refresh rebuilds everything from GET /status +
 * GET /scene, so nothing here needs to survive.
 */

import type { EngineStatus, MonitorEvent, PersonDot, SceneDoc } from "./types.js";

export const EVENT_RING_CAPACITY = 500;

export type ConnectionState = "connecting" | "connected" | "disconnected";

export interface ConsoleState {
  connection: ConnectionState;
  retryInMs: number | null;
  status: EngineStatus | null;
  scene: SceneDoc | null;
  events: MonitorEvent[]; // newest last, capped at EVENT_RING_CAPACITY
  positions: Map<number, PersonDot>;
  pending: Set<string>; // command keys with an in-flight request
  lastError: string | null;
}

type Listener = (state: ConsoleState) => void;

function isPositionInput(payload: Record<string, unknown>): payload is {
  type: "position";
  persons: PersonDot[];
} {
  return payload["type"] === "position" && Array.isArray(payload["persons"]);
}

export class ConsoleStore {
  private state: ConsoleState = {
    connection: "connecting",
    retryInMs: null,
    status: null,
    scene: null,
    events: [],
    positions: new Map(),
    pending: new Set(),
    lastError: null,
  };
  private listeners: Listener[] = [];

  get current(): ConsoleState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  setConnection(connection: ConnectionState, retryInMs: number | null = null): void {
    this.state = { ...this.state, connection, retryInMs };
    this.emit();
  }

  setStatus(status: EngineStatus): void {
    this.state = { ...this.state, status };
    this.emit();
  }

  setScene(scene: SceneDoc): void {
    this.state = { ...this.state, scene };
    this.emit();
  }

  setError(message: string | null): void {
    this.state = { ...this.state, lastError: message };
    this.emit();
  }

  beginPending(key: string): void {
    const pending = new Set(this.state.pending);
    pending.add(key);
    this.state = { ...this.state, pending };
    this.emit();
  }

  endPending(key: string): void {
    const pending = new Set(this.state.pending);
    pending.delete(key);
    this.state = { ...this.state, pending };
    this.emit();
  }

  applyMonitorEvent(event: MonitorEvent): void {
    const events = this.state.events.length >= EVENT_RING_CAPACITY
      ? [...this.state.events.slice(this.state.events.length - EVENT_RING_CAPACITY + 1), event]
      : [...this.state.events, event];
    let positions = this.state.positions;
    if (event.kind === "input" && isPositionInput(event.payload)) {
      positions = new Map();
      for (const person of event.payload.persons) {
        positions.set(person.id, person);
      }
    }
    this.state = { ...this.state, events, positions };
    this.emit();
  }

  clearEvents(): void {
    this.state = { ...this.state, events: [], positions: new Map() };
    this.emit();
  }
}
