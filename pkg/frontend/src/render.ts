/**
 * Pure rendering data: a frame maps deterministically to a scene
 * description (projected bead positions, segments and an optional tube
 * radius), and the energy history maps to chart geometry.  The canvas
 * layer in main.ts just rasterizes these; re-rendering the same frame
 * yields an identical scene.
 */
import type { Frame } from "./protocol.js";
import type { EnergySample } from "./viewmodel.js";

export interface Camera {
  yaw: number;
  pitch: number;
  zoom: number;
}

export interface SceneBead {
  x: number;
  y: number;
  depth: number;
}

export interface Scene {
  beads: SceneBead[];
  /** index pairs into beads, consecutive along the closed curve */
  segments: [number, number][];
  tubeRadius: number;
  center: { x: number; y: number };
  scale: number;
}

export function projectFrame(
  frame: Frame,
  camera: Camera,
  tubeScale = 0,
): Scene {
  const cy = Math.cos(camera.yaw);
  const sy = Math.sin(camera.yaw);
  const cp = Math.cos(camera.pitch);
  const sp = Math.sin(camera.pitch);
  const beads: SceneBead[] = frame.points.map(([x, y, z]) => {
    const rx = cy * x + sy * y;
    const ry = -sy * x + cy * y;
    const vy = cp * ry - sp * z;
    const depth = sp * ry + cp * z;
    return { x: rx * camera.zoom, y: vy * camera.zoom, depth };
  });
  const segments: [number, number][] = beads.map((_, i) => [
    i,
    (i + 1) % beads.length,
  ]);
  let cx = 0;
  let cyy = 0;
  for (const b of beads) {
    cx += b.x;
    cyy += b.y;
  }
  return {
    beads,
    segments,
    tubeRadius: tubeScale * camera.zoom,
    center: { x: cx / beads.length, y: cyy / beads.length },
    scale: camera.zoom,
  };
}

export interface ChartOptions {
  width: number;
  height: number;
  logScale: boolean; // log by default: untangling spans decades
}

export interface ChartSeries {
  points: { x: number; y: number }[];
  yMin: number;
  yMax: number;
}

export function energyChart(
  history: EnergySample[],
  options: ChartOptions = { width: 400, height: 120, logScale: true },
): ChartSeries {
  if (history.length === 0) {
    return { points: [], yMin: 0, yMax: 1 };
  }
  const transform = (e: number) =>
    options.logScale ? Math.log10(Math.max(e, 1e-300)) : e;
  const values = history.map((s) => transform(s.energy));
  let yMin = Math.min(...values);
  let yMax = Math.max(...values);
  if (yMax === yMin) {
    yMax = yMin + 1;
  }
  const stepMin = history[0].step;
  const stepMax = history[history.length - 1].step;
  const span = Math.max(1, stepMax - stepMin);
  return {
    points: history.map((s, i) => ({
      x: ((s.step - stepMin) / span) * options.width,
      y: options.height * (1 - (values[i] - yMin) / (yMax - yMin)),
    })),
    yMin,
    yMax,
  };
}
