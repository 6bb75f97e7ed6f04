/**
 * Wire protocol spoken with the steering service: one JSON object per
 * message (text WebSocket frames or newline-delimited TCP).  Outbound
 * commands are validated against these schemas before they leave the
 * client, so every control emits a well-formed message by construction.
 */
import { z } from "zod";

export const SETTABLE_PARAMS = {
  dt: { min: 1e-9, max: 1.0 },
  spring_k: { min: 0, max: 1e6 },
  gamma: { min: 0, max: 1e3 },
  repulsion_exponent: { min: 2, max: 12 },
  repulsion_strength: { min: 1e-30, max: 1e6 },
  frame_stride: { min: 1, max: 100000 },
  max_disp_fraction: { min: 1e-4, max: 0.999 },
} as const;

export type SettableParam = keyof typeof SETTABLE_PARAMS;

const session = z.string().min(1).optional();

export const loadCommand = z.object({
  cmd: z.literal("load"),
  spec: z.string().min(1),
  beads: z.number().int().min(12).optional(),
  session,
});

export const runCommand = z.object({ cmd: z.literal("run"), session });
export const pauseCommand = z.object({ cmd: z.literal("pause"), session });

export const modeCommand = z.object({
  cmd: z.literal("mode"),
  value: z.union([z.literal("constrained"), z.literal("free")]),
  session,
});

export const perturbCommand = z.object({
  cmd: z.literal("perturb"),
  magnitude: z.number().nonnegative(),
  seed: z.number().int(),
  session,
});

export const setCommand = z
  .object({
    cmd: z.literal("set"),
    param: z.enum(
      Object.keys(SETTABLE_PARAMS) as [SettableParam, ...SettableParam[]],
    ),
    value: z.number(),
    session,
  })
  .refine(
    (msg) => {
      const range = SETTABLE_PARAMS[msg.param];
      return msg.value >= range.min && msg.value <= range.max;
    },
    { message: "value out of range for parameter" },
  );

export const snapshotCommand = z.object({
  cmd: z.literal("snapshot"),
  path: z.string().min(1),
  session,
});

export const subscribeCommand = z.object({ cmd: z.literal("subscribe"), session });

export const command = z.union([
  loadCommand,
  runCommand,
  pauseCommand,
  modeCommand,
  perturbCommand,
  setCommand,
  snapshotCommand,
  subscribeCommand,
]);

export type Command = z.infer<typeof command>;

const point = z.tuple([z.number(), z.number(), z.number()]);

export const frameMessage = z.object({
  type: z.literal("frame"),
  session: z.string().optional(),
  step: z.number().int().nonnegative(),
  energy: z.number(),
  points: z.array(point).min(3),
});

export const statusMessage = z.object({
  type: z.literal("status"),
  session: z.string().optional(),
  spec: z.string().optional(),
  params: z.record(z.string(), z.unknown()).optional(),
  step: z.number().int().nullable().optional(),
  mode: z.union([z.literal("constrained"), z.literal("free")]).nullable().optional(),
  running: z.boolean(),
  beads: z.number().int().optional(),
});

export const errorMessage = z.object({
  type: z.literal("error"),
  session: z.string().optional(),
  message: z.string(),
});

export const serverMessage = z.discriminatedUnion("type", [
  frameMessage,
  statusMessage,
  errorMessage,
]);

export type Frame = z.infer<typeof frameMessage>;
export type Status = z.infer<typeof statusMessage>;
export type ServerMessage = z.infer<typeof serverMessage>;

/** Validate and serialize an outbound command. Throws on invalid input. */
export function encodeCommand(msg: Command): string {
  return JSON.stringify(command.parse(msg));
}

/** Parse one inbound line/frame; returns null for unrecognized payloads. */
export function decodeServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  const result = serverMessage.safeParse(raw);
  return result.success ? result.data : null;
}
