/**
 * Monitor stream reader: consumes the engine's NDJSON /events feed via
 * streaming fetch and reconnects with exponential backoff (capped at
 * 5 s) whenever the connection drops or the engine restarts.
 */

import type { MonitorEvent } from "./types.js";

export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 5000;

export function reconnectDelayMs(attempt: number): number {
  // attempt 0 is the first retry
  return Math.min(BACKOFF_BASE_MS * 2 ** attempt, BACKOFF_CAP_MS);
}

/** Split buffered text into complete NDJSON lines plus the unfinished tail. */
export function splitLines(buffer: string, chunk: string): { lines: string[]; rest: string } {
  const combined = buffer + chunk;
  const parts = combined.split("\n");
  const rest = parts.pop() ?? "";
  return { lines: parts.filter((line) => line.trim().length > 0), rest };
}

export function parseEvent(line: string): MonitorEvent | null {
  try {
    const parsed = JSON.parse(line) as MonitorEvent;
    if (typeof parsed.seq === "number" && typeof parsed.kind === "string") {
      return parsed;
    }
    return null;
  } catch {
    return null;
  }
}

export interface StreamCallbacks {
  onEvent: (event: MonitorEvent) => void;
  onConnected: () => void;
  onDisconnected: (willRetryInMs: number | null) => void;
}

export class EventStreamReader {
  private stopped = false;
  private attempt = 0;
  private controller: AbortController | null = null;

  constructor(
    private baseUrl: string,
    private callbacks: StreamCallbacks,
    private fetchImpl: typeof fetch = fetch.bind(globalThis),
  ) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.consumeOnce();
      } catch {
        // fall through to the retry path
      }
      if (this.stopped) {
        this.callbacks.onDisconnected(null);
        return;
      }
      const delay = reconnectDelayMs(this.attempt);
      this.attempt += 1;
      this.callbacks.onDisconnected(delay);
      await new Promise((resolve) => setTimeout(resolve, delay));
    }
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const response = await this.fetchImpl(this.baseUrl + "/events", {
      signal: this.controller.signal,
    });
    if (!response.ok || response.body === null) {
      throw new Error(`events stream answered ${response.status}`);
    }
    this.attempt = 0;
    this.callbacks.onConnected();
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        return;
      }
      const { lines, rest } = splitLines(buffer, decoder.decode(value, { stream: true }));
      buffer = rest;
      for (const line of lines) {
        const event = parseEvent(line);
        if (event !== null) {
          this.callbacks.onEvent(event);
        }
      }
    }
  }
}
