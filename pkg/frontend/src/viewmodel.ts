/**
 * Client state derived purely from server messages plus the local camera.
 * No physics happens here: the latest frame, a bounded energy history and
 * the last acknowledged parameter set are all the UI ever needs.
 */
import type { Frame, ServerMessage, Status } from "./protocol.js";

export const ENERGY_HISTORY_CAPACITY = 10_000;

export type ConnectionState = "connecting" | "open" | "closed";

export interface EnergySample {
  step: number;
  energy: number;
}

export class ViewModel {
  latestFrame: Frame | null = null;
  latestStatus: Status | null = null;
  lastError: string | null = null;
  connection: ConnectionState = "connecting";
  lastMessageAt = 0;
  awaitingAck = false;

  private history: EnergySample[] = [];
  private historyStart = 0;

  /** Apply one server message; returns the message for chaining. */
  apply(msg: ServerMessage, now = Date.now()): ServerMessage {
    this.lastMessageAt = now;
    if (msg.type === "frame") {
      this.latestFrame = msg;
      this.pushSample({ step: msg.step, energy: msg.energy });
    } else if (msg.type === "status") {
      this.latestStatus = msg;
      this.lastError = null;
      this.awaitingAck = false;
    } else {
      this.lastError = msg.message;
      this.awaitingAck = false;
    }
    return msg;
  }

  private pushSample(sample: EnergySample) {
    this.history.push(sample);
    if (this.history.length - this.historyStart > ENERGY_HISTORY_CAPACITY) {
      this.historyStart += 1;
      if (this.historyStart > ENERGY_HISTORY_CAPACITY) {
        this.history = this.history.slice(this.historyStart);
        this.historyStart = 0;
      }
    }
  }

  energyHistory(): EnergySample[] {
    return this.history.slice(this.historyStart);
  }

  /** True when no frame arrived for `silenceMs` while running. */
  isStale(now = Date.now(), silenceMs = 5000): boolean {
    if (this.connection !== "open" || !this.latestStatus?.running) return false;
    return now - this.lastMessageAt > silenceMs;
  }

  beadCount(): number {
    return this.latestFrame?.points.length ?? 0;
  }
}
