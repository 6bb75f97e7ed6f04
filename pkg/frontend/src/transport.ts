/**
 * Connection handling: a WebSocket-shaped transport with exponential
 * backoff reconnection.  The socket factory is injectable so tests drive
 * the client with a scripted fake instead of a network.
 */
import { decodeServerMessage, encodeCommand, type Command, type ServerMessage } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  url: string;
  factory: SocketFactory;
  onMessage: (msg: ServerMessage) => void;
  onState?: (state: "connecting" | "open" | "closed") => void;
  backoffBaseMs?: number;
  backoffMaxMs?: number;
  scheduleReconnect?: (fn: () => void, delayMs: number) => void;
}

export class Client {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private closed = false;

  constructor(private readonly options: ClientOptions) {}

  connect(): void {
    if (this.closed) return;
    this.options.onState?.("connecting");
    const socket = this.options.factory(this.options.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.options.onState?.("open");
    };
    socket.onmessage = (event) => {
      const msg = decodeServerMessage(event.data);
      if (msg) this.options.onMessage(msg);
    };
    socket.onclose = () => {
      this.socket = null;
      this.options.onState?.("closed");
      if (this.closed) return;
      const base = this.options.backoffBaseMs ?? 500;
      const max = this.options.backoffMaxMs ?? 15_000;
      const delay = Math.min(max, base * 2 ** this.attempts);
      this.attempts += 1;
      const schedule =
        this.options.scheduleReconnect ?? ((fn, ms) => setTimeout(fn, ms));
      schedule(() => this.connect(), delay);
    };
  }

  /** Validates, serializes and sends; throws when the command is invalid. */
  send(cmd: Command): void {
    const encoded = encodeCommand(cmd);
    if (!this.socket) throw new Error("not connected");
    this.socket.send(encoded);
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
