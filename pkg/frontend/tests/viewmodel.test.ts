import { describe, expect, it } from "vitest";
import type { Frame } from "../src/protocol.js";
import { energyChart, projectFrame } from "../src/render.js";
import { ENERGY_HISTORY_CAPACITY, ViewModel } from "../src/viewmodel.js";

function makeFrame(step: number, beads = 24): Frame {
  const points: [number, number, number][] = [];
  for (let i = 0; i < beads; i++) {
    const t = (2 * Math.PI * i) / beads;
    points.push([Math.cos(t), Math.sin(t), 0.1 * Math.sin(3 * t)]);
  }
  return { type: "frame", step, energy: 100 / (step + 1), points };
}

describe("replayed recording", () => {
  it("renders 100 chart samples and the final frame's bead count", () => {
    const model = new ViewModel();
    for (let i = 0; i < 100; i++) {
      model.apply(makeFrame(i * 10, 24 + (i % 3)));
    }
    const history = model.energyHistory();
    expect(history).toHaveLength(100);
    expect(history.map((s) => s.step)).toEqual(
      Array.from({ length: 100 }, (_, i) => i * 10),
    );
    expect(model.beadCount()).toBe(24 + (99 % 3));

    const chart = energyChart(history, { width: 400, height: 100, logScale: true });
    expect(chart.points).toHaveLength(100);
    // samples are in step order left to right
    const xs = chart.points.map((p) => p.x);
    expect([...xs].sort((a, b) => a - b)).toEqual(xs);
  });

  it("bounds the energy history at its capacity", () => {
    const model = new ViewModel();
    for (let i = 0; i < ENERGY_HISTORY_CAPACITY + 500; i++) {
      model.apply(makeFrame(i));
    }
    const history = model.energyHistory();
    expect(history).toHaveLength(ENERGY_HISTORY_CAPACITY);
    expect(history[0].step).toBe(500);
  });
});

describe("status and errors", () => {
  it("tracks status, clears errors, releases ack gating", () => {
    const model = new ViewModel();
    model.awaitingAck = true;
    model.apply({ type: "error", message: "bad spec" });
    expect(model.lastError).toBe("bad spec");
    expect(model.awaitingAck).toBe(false);
    model.apply({ type: "status", running: true, mode: "constrained" });
    expect(model.lastError).toBeNull();
    expect(model.latestStatus?.running).toBe(true);
  });

  it("flags staleness after five silent seconds while running", () => {
    const model = new ViewModel();
    model.connection = "open";
    model.apply({ type: "status", running: true, mode: "free" }, 1000);
    expect(model.isStale(5500)).toBe(false);
    expect(model.isStale(6500)).toBe(true);
  });
});

describe("pure rendering", () => {
  it("same frame yields an identical scene", () => {
    const frame = makeFrame(5);
    const camera = { yaw: 0.3, pitch: 0.2, zoom: 100 };
    const a = projectFrame(frame, camera, 0.01);
    const b = projectFrame(frame, camera, 0.01);
    expect(a).toEqual(b);
    expect(a.beads).toHaveLength(frame.points.length);
    expect(a.segments).toHaveLength(frame.points.length);
  });
});
