import { describe, expect, it } from "vitest";
import type { SocketLike } from "../src/transport.js";
import { Client } from "../src/transport.js";
import type { ServerMessage } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  send(data: string) {
    this.sent.push(data);
  }
  close() {
    this.onclose?.();
  }
}

describe("transport", () => {
  it("delivers decoded messages and sends validated commands", () => {
    const sockets: FakeSocket[] = [];
    const received: ServerMessage[] = [];
    const client = new Client({
      url: "ws://test/",
      factory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      onMessage: (msg) => received.push(msg),
    });
    client.connect();
    sockets[0].onopen?.();
    sockets[0].onmessage?.({
      data: JSON.stringify({ type: "status", running: false }),
    });
    expect(received).toHaveLength(1);
    sockets[0].onmessage?.({ data: "garbage" });
    expect(received).toHaveLength(1);

    client.send({ cmd: "run" });
    expect(JSON.parse(sockets[0].sent[0])).toEqual({ cmd: "run" });
    expect(() => client.send({ cmd: "set", param: "dt", value: -1 } as never)).toThrow();
  });

  it("reconnects with exponential backoff after drops", () => {
    const sockets: FakeSocket[] = [];
    const delays: number[] = [];
    const pending: (() => void)[] = [];
    const states: string[] = [];
    const client = new Client({
      url: "ws://test/",
      factory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      onMessage: () => {},
      onState: (s) => states.push(s),
      backoffBaseMs: 100,
      scheduleReconnect: (fn, ms) => {
        delays.push(ms);
        pending.push(fn);
      },
    });
    client.connect();
    sockets[0].close(); // drop before open: schedule retry at base delay
    pending.shift()!();
    sockets[1].close();
    pending.shift()!();
    expect(sockets).toHaveLength(3);
    expect(delays).toEqual([100, 200]);
    expect(states).toContain("closed");
    client.close();
  });
});
