/**
 * Session glue: connect to an engine, mirror its state, and funnel every
 * UI activation through one dispatch path that enforces the console's
 * contract — exactly one API call per activation, optimistic pending
 * indicators, inline errors, and a scene re-sync after every mutation
 * (successful or failed) so the mirror never drifts.
 */

import { ApiClient, ApiError } from "./api.js";
import { ConsoleStore } from "./state.js";
import { EventStreamReader } from "./stream.js";

export class ConsoleSession {
  readonly api: ApiClient;
  readonly store: ConsoleStore;
  private stream: EventStreamReader | null = null;

  constructor(baseUrl: string, store?: ConsoleStore, api?: ApiClient) {
    this.api = api ?? new ApiClient(baseUrl);
    this.store = store ?? new ConsoleStore();
    this.baseUrl = baseUrl;
  }

  private baseUrl: string;

  async connect(): Promise<void> {
    this.store.setConnection("connecting");
    try {
      const [status, scene] = await Promise.all([this.api.status(), this.api.getScene()]);
      this.store.setStatus(status);
      this.store.setScene(scene);
      this.store.setConnection("connected");
      this.store.setError(null);
    } catch (err) {
      this.store.setConnection("disconnected");
      this.store.setError(err instanceof Error ? err.message : String(err));
    }
    if (this.stream === null) {
      this.stream = new EventStreamReader(this.baseUrl, {
        onEvent: (event) => this.store.applyMonitorEvent(event),
        onConnected: () => {
          this.store.setConnection("connected");
          // the engine may have restarted with different state; re-mirror
          void this.refresh();
        },
        onDisconnected: (retryInMs) => this.store.setConnection("disconnected", retryInMs),
      });
      this.stream.start();
    }
  }

  async refresh(): Promise<void> {
    try {
      const [status, scene] = await Promise.all([this.api.status(), this.api.getScene()]);
      this.store.setStatus(status);
      this.store.setScene(scene);
    } catch {
      // stream callbacks own the disconnected banner
    }
  }

  disconnect(): void {
    this.stream?.stop();
    this.stream = null;
  }

  /**
   * Run one control command. `key` names the pending indicator (for
   * example "memory:3:save"); `mutates` re-mirrors the scene afterwards.
   */
  async dispatch(key: string, call: () => Promise<unknown>, mutates = true): Promise<boolean> {
    this.store.beginPending(key);
    this.store.setError(null);
    try {
      await call();
      if (mutates) {
        await this.refresh();
      }
      return true;
    } catch (err) {
      const message =
        err instanceof ApiError ? `${err.message} (${err.code})` : err instanceof Error ? err.message : String(err);
      this.store.setError(message);
      // a failed mutation may have landed partially; re-sync the mirror
      await this.refresh();
      return false;
    } finally {
      this.store.endPending(key);
    }
  }
}
