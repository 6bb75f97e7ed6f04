import { describe, expect, it } from "vitest";
import {
  command,
  decodeServerMessage,
  encodeCommand,
  SETTABLE_PARAMS,
} from "../src/protocol.js";

describe("outbound command schemas", () => {
  it("snapshots every command shape", () => {
    const samples = [
      { cmd: "load", spec: "[11.10]", beads: 200 },
      { cmd: "run" },
      { cmd: "pause" },
      { cmd: "mode", value: "free" },
      { cmd: "mode", value: "constrained" },
      { cmd: "perturb", magnitude: 0.05, seed: 42 },
      { cmd: "set", param: "dt", value: 0.001 },
      { cmd: "snapshot", path: "out.json" },
      { cmd: "subscribe", session: "main" },
    ] as const;
    const encoded = samples.map((s) => encodeCommand(s as never));
    expect(encoded).toMatchSnapshot();
    for (const text of encoded) {
      expect(() => command.parse(JSON.parse(text))).not.toThrow();
    }
  });

  it("rejects out-of-range set values", () => {
    expect(() =>
      encodeCommand({ cmd: "set", param: "repulsion_exponent", value: -1 }),
    ).toThrow();
    expect(() =>
      encodeCommand({ cmd: "set", param: "dt", value: 50 }),
    ).toThrow();
  });

  it("rejects unknown parameters and commands", () => {
    expect(() =>
      encodeCommand({ cmd: "set", param: "bead_count", value: 10 } as never),
    ).toThrow();
    expect(() => encodeCommand({ cmd: "explode" } as never)).toThrow();
  });

  it("every settable parameter encodes at its range bounds", () => {
    for (const [param, range] of Object.entries(SETTABLE_PARAMS)) {
      for (const value of [range.min, range.max]) {
        const text = encodeCommand({ cmd: "set", param: param as never, value });
        expect(JSON.parse(text)).toEqual({ cmd: "set", param, value });
      }
    }
  });
});

describe("inbound messages", () => {
  it("decodes frames, statuses and errors", () => {
    const frame = decodeServerMessage(
      JSON.stringify({
        type: "frame",
        step: 10,
        energy: 123.5,
        points: [
          [0, 0, 0],
          [1, 0, 0],
          [0, 1, 0],
        ],
      }),
    );
    expect(frame?.type).toBe("frame");
    const status = decodeServerMessage(
      JSON.stringify({ type: "status", running: true, mode: "free" }),
    );
    expect(status?.type).toBe("status");
    const error = decodeServerMessage(
      JSON.stringify({ type: "error", message: "nope" }),
    );
    expect(error?.type).toBe("error");
  });

  it("returns null on garbage", () => {
    expect(decodeServerMessage("{not json")).toBeNull();
    expect(decodeServerMessage(JSON.stringify({ type: "mystery" }))).toBeNull();
  });
});
