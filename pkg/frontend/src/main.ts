/**
 * Browser entry point: connects to the service over WebSocket (host and
 * session from the URL query), renders the bead curve on a canvas with a
 * small orbit camera, draws the energy strip chart and wires the control
 * panel.  All state flows through the ViewModel; this file only paints.
 */
import { ControlPanel, LoadForm } from "./controls.js";
import { energyChart, projectFrame, type Camera } from "./render.js";
import { Client } from "./transport.js";
import { ViewModel } from "./viewmodel.js";
import { SETTABLE_PARAMS, type SettableParam } from "./protocol.js";

function query(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

export function start(): void {
  const host = query("host", window.location.hostname || "127.0.0.1");
  const port = query("port", "8080");
  const session = query("session", "main");
  const url = `ws://${host}:${port}/`;

  const model = new ViewModel();
  const banner = document.getElementById("banner") as HTMLDivElement;
  const scene = document.getElementById("scene") as HTMLCanvasElement;
  const chart = document.getElementById("chart") as HTMLCanvasElement;
  const camera: Camera = { yaw: 0.6, pitch: 0.4, zoom: Math.min(scene.width, scene.height) * 1.1 };
  let tubeScale = 0;

  const client = new Client({
    url,
    factory: (u) => new WebSocket(u) as never,
    onMessage: (msg) => model.apply(msg),
    onState: (state) => {
      model.connection = state;
    },
  });
  client.connect();
  const send = (cmd: Parameters<Client["send"]>[0]) => client.send(cmd);
  const panel = new ControlPanel(model, send, session);
  const form = new LoadForm(send, session);
  send({ cmd: "subscribe", session });

  // camera orbit by dragging
  let dragging = false;
  let last = { x: 0, y: 0 };
  scene.addEventListener("mousedown", (e) => {
    dragging = true;
    last = { x: e.clientX, y: e.clientY };
  });
  window.addEventListener("mouseup", () => (dragging = false));
  window.addEventListener("mousemove", (e) => {
    if (!dragging) return;
    camera.yaw += (e.clientX - last.x) * 0.01;
    camera.pitch += (e.clientY - last.y) * 0.01;
    last = { x: e.clientX, y: e.clientY };
  });
  scene.addEventListener("wheel", (e) => {
    camera.zoom *= e.deltaY > 0 ? 0.9 : 1.1;
    e.preventDefault();
  });

  const controls = document.getElementById("controls") as HTMLDivElement;
  const button = (label: string, onClick: () => void) => {
    const el = document.createElement("button");
    el.textContent = label;
    el.onclick = () => {
      try {
        onClick();
      } catch (err) {
        banner.textContent = String(err);
      }
    };
    controls.appendChild(el);
    return el;
  };
  const runButton = button("run/pause", () => panel.toggleRun());
  const modeButton = button("mode", () => panel.toggleMode());
  const perturbInput = document.createElement("input");
  perturbInput.type = "range";
  perturbInput.min = "0";
  perturbInput.max = "0.02";
  perturbInput.step = "0.0005";
  perturbInput.value = "0.005";
  controls.appendChild(perturbInput);
  button("perturb", () => panel.perturb(Number(perturbInput.value)));
  const tubeInput = document.createElement("input");
  tubeInput.type = "range";
  tubeInput.min = "0";
  tubeInput.max = "0.02";
  tubeInput.step = "0.001";
  tubeInput.value = "0";
  tubeInput.oninput = () => (tubeScale = Number(tubeInput.value));
  controls.appendChild(tubeInput);

  for (const param of ["dt", "spring_k", "gamma"] as SettableParam[]) {
    const range = SETTABLE_PARAMS[param];
    const input = document.createElement("input");
    input.type = "number";
    input.placeholder = param;
    input.onchange = () => {
      const v = Number(input.value);
      if (Number.isFinite(v)) panel.setParam(param, v);
    };
    input.title = `${param} in [${range.min}, ${range.max}]`;
    controls.appendChild(input);
  }

  const specInput = document.getElementById("spec") as HTMLInputElement;
  const loadButton = document.getElementById("load") as HTMLButtonElement;
  specInput.placeholder = "[11.10]  or  N((7,7,7,7))  or  T(2,3)";
  specInput.oninput = () => {
    loadButton.disabled = !form.canSubmit(specInput.value);
  };
  loadButton.disabled = true;
  loadButton.onclick = () => {
    try {
      form.submit(specInput.value);
    } catch (err) {
      banner.textContent = String(err);
    }
  };

  function paint() {
    const sceneCtx = scene.getContext("2d")!;
    sceneCtx.clearRect(0, 0, scene.width, scene.height);
    const frame = model.latestFrame;
    if (frame) {
      const projected = projectFrame(frame, camera, tubeScale);
      const ox = scene.width / 2 - projected.center.x;
      const oy = scene.height / 2 - projected.center.y;
      sceneCtx.lineWidth = Math.max(1, projected.tubeRadius * 2);
      sceneCtx.strokeStyle = "#2266cc";
      sceneCtx.beginPath();
      for (const [a, b] of projected.segments) {
        sceneCtx.moveTo(projected.beads[a].x + ox, projected.beads[a].y + oy);
        sceneCtx.lineTo(projected.beads[b].x + ox, projected.beads[b].y + oy);
      }
      sceneCtx.stroke();
      sceneCtx.fillStyle = "#113355";
      for (const bead of projected.beads) {
        sceneCtx.fillRect(bead.x + ox - 1, bead.y + oy - 1, 2, 2);
      }
    }

    const chartCtx = chart.getContext("2d")!;
    chartCtx.clearRect(0, 0, chart.width, chart.height);
    const series = energyChart(model.energyHistory(), {
      width: chart.width,
      height: chart.height,
      logScale: true,
    });
    chartCtx.strokeStyle = "#cc4422";
    chartCtx.beginPath();
    series.points.forEach((p, i) =>
      i === 0 ? chartCtx.moveTo(p.x, p.y) : chartCtx.lineTo(p.x, p.y),
    );
    chartCtx.stroke();

    const status = model.latestStatus;
    const bits = [
      model.connection,
      status ? `step ${status.step ?? "-"} ${status.mode ?? ""}` : "no session",
      model.latestFrame ? `E=${model.latestFrame.energy.toPrecision(8)}` : "",
      model.isStale() ? "STALE: no frames for 5 s" : "",
      model.lastError ? `error: ${model.lastError}` : "",
    ];
    banner.textContent = bits.filter(Boolean).join(" | ");
    runButton.disabled = modeButton.disabled = !panel.enabled();
    requestAnimationFrame(paint);
  }
  requestAnimationFrame(paint);
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", start);
}
