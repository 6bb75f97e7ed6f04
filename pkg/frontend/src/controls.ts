/**
 * Control panel actions mapped one-to-one onto protocol commands.  Every
 * action funnels through the same validated encoder; sliders clamp to the
 * whitelist ranges client-side, and actions are disabled between a sent
 * command and its status acknowledgment.
 */
import {
  SETTABLE_PARAMS,
  type Command,
  type SettableParam,
} from "./protocol.js";
import type { ViewModel } from "./viewmodel.js";

export type Sender = (cmd: Command) => void;

export class ControlPanel {
  private perturbCounter = 0;

  constructor(
    private readonly model: ViewModel,
    private readonly send: Sender,
    private readonly session?: string,
  ) {}

  /** Whether interactive controls should be enabled right now. */
  enabled(): boolean {
    return this.model.connection === "open" && !this.model.awaitingAck;
  }

  private dispatch(cmd: Command) {
    this.model.awaitingAck = true;
    try {
      this.send(this.session ? { ...cmd, session: this.session } : cmd);
    } catch (err) {
      this.model.awaitingAck = false;
      throw err;
    }
  }

  toggleRun(): void {
    const running = this.model.latestStatus?.running ?? false;
    this.dispatch({ cmd: running ? "pause" : "run" });
  }

  toggleMode(): void {
    const mode = this.model.latestStatus?.mode ?? "constrained";
    this.dispatch({ cmd: "mode", value: mode === "constrained" ? "free" : "constrained" });
  }

  /** Perturb with a fresh seed each press so repeats differ. */
  perturb(magnitude: number, seedSource: () => number = () => this.freshSeed()): void {
    this.dispatch({
      cmd: "perturb",
      magnitude: Math.max(0, magnitude),
      seed: seedSource(),
    });
  }

  private freshSeed(): number {
    this.perturbCounter += 1;
    return (Date.now() % 1_000_000_000) * 1000 + (this.perturbCounter % 1000);
  }

  /** Slider input: clamps into the whitelisted range before sending. */
  setParam(param: SettableParam, value: number): void {
    const range = SETTABLE_PARAMS[param];
    const clamped = Math.min(range.max, Math.max(range.min, value));
    this.dispatch({ cmd: "set", param, value: clamped });
  }

  snapshot(path: string): void {
    this.dispatch({ cmd: "snapshot", path });
  }
}

/** Load-form logic: empty input disables submission, anything else is
 * sent verbatim and the server reports syntax errors with offsets. */
export class LoadForm {
  constructor(
    private readonly send: Sender,
    private readonly session?: string,
  ) {}

  canSubmit(text: string): boolean {
    return text.trim().length > 0;
  }

  submit(text: string, beads?: number): Command {
    if (!this.canSubmit(text)) {
      throw new Error("empty specification");
    }
    const cmd: Command = {
      cmd: "load",
      spec: text.trim(),
      ...(beads !== undefined ? { beads } : {}),
      ...(this.session ? { session: this.session } : {}),
    };
    this.send(cmd);
    return cmd;
  }
}
