import { describe, expect, it } from "vitest";
import { ControlPanel, LoadForm } from "../src/controls.js";
import { command, type Command } from "../src/protocol.js";
import { ViewModel } from "../src/viewmodel.js";

function harness(session?: string) {
  const sent: Command[] = [];
  const model = new ViewModel();
  model.connection = "open";
  const panel = new ControlPanel(model, (cmd) => sent.push(cmd), session);
  return { sent, model, panel };
}

describe("control panel emissions", () => {
  it("run/pause toggle follows the last status", () => {
    const { sent, model, panel } = harness();
    panel.toggleRun();
    model.apply({ type: "status", running: true, mode: "constrained" });
    panel.toggleRun();
    expect(sent.map((c) => c.cmd)).toEqual(["run", "pause"]);
  });

  it("mode toggle from constrained sends free", () => {
    const { sent, model, panel } = harness();
    model.apply({ type: "status", running: false, mode: "constrained" });
    panel.toggleMode();
    expect(sent[0]).toEqual({ cmd: "mode", value: "free" });
  });

  it("perturb uses the given magnitude and a fresh seed each press", () => {
    const { sent, panel } = harness();
    let n = 100;
    panel.perturb(0.05, () => n++);
    // simulate the ack so the next action is allowed
    panel["model"].awaitingAck = false;
    panel.perturb(0.05, () => n++);
    expect(sent[0]).toEqual({ cmd: "perturb", magnitude: 0.05, seed: 100 });
    expect(sent[1]).toEqual({ cmd: "perturb", magnitude: 0.05, seed: 101 });
  });

  it("sliders clamp out-of-range values into the whitelist", () => {
    const { sent, model, panel } = harness();
    panel.setParam("dt", 99);
    model.awaitingAck = false;
    panel.setParam("repulsion_exponent", -5);
    expect(sent[0]).toEqual({ cmd: "set", param: "dt", value: 1.0 });
    expect(sent[1]).toEqual({ cmd: "set", param: "repulsion_exponent", value: 2 });
  });

  it("every emitted message is schema-valid", () => {
    const { sent, model, panel } = harness("main");
    panel.toggleRun();
    model.awaitingAck = false;
    panel.toggleMode();
    model.awaitingAck = false;
    panel.perturb(0.01);
    model.awaitingAck = false;
    panel.setParam("spring_k", 10);
    model.awaitingAck = false;
    panel.snapshot("snap.json");
    for (const msg of sent) {
      expect(() => command.parse(msg)).not.toThrow();
    }
  });

  it("actions gate on pending acknowledgments", () => {
    const { model, panel } = harness();
    expect(panel.enabled()).toBe(true);
    panel.toggleRun();
    expect(panel.enabled()).toBe(false);
    model.apply({ type: "status", running: true, mode: "free" });
    expect(panel.enabled()).toBe(true);
  });
});

describe("load form", () => {
  it("round-trips the two reference specs", () => {
    const sent: Command[] = [];
    const form = new LoadForm((cmd) => sent.push(cmd));
    for (const spec of ["[11.10]", "N((7,7,7,7))"]) {
      const cmd = form.submit(spec);
      expect(cmd).toEqual({ cmd: "load", spec });
      expect(() => command.parse(cmd)).not.toThrow();
      const wire = JSON.parse(JSON.stringify(cmd));
      expect(wire.spec).toBe(spec);
    }
    expect(sent).toHaveLength(2);
  });

  it("disables submission for empty input", () => {
    const form = new LoadForm(() => {});
    expect(form.canSubmit("")).toBe(false);
    expect(form.canSubmit("   ")).toBe(false);
    expect(form.canSubmit("[3]")).toBe(true);
    expect(() => form.submit("  ")).toThrow();
  });

  it("passes bead counts through", () => {
    const sent: Command[] = [];
    const form = new LoadForm((cmd) => sent.push(cmd), "s1");
    form.submit("T(2,3)", 300);
    expect(sent[0]).toEqual({ cmd: "load", spec: "T(2,3)", beads: 300, session: "s1" });
  });
});
