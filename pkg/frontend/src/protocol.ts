// Command construction with server-rule clamping, plus the steering rate
// limiter: continuous commands are latest-wins and leave at most 20 per
// second; discrete commands pass straight through.

import { ClientCommand, PROTOCOL_VERSION, Pulse, Pump, SetRotating, Simple, Vec3 } from "./types";

export const STRENGTH_MAX_MT = 40;
export const FREQ_MAX_HZ = 30;
export const STEER_RATE_HZ = 20;

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(Math.max(x, lo), hi);
}

export function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]);
  if (!isFinite(n) || n === 0) return [0, 1, 0];
  return [v[0] / n, v[1] / n, v[2] / n];
}

export function makeSetRotating(axis: Vec3, strengthMt: number, freqHz: number): SetRotating {
  return {
    v: PROTOCOL_VERSION,
    type: "set_rotating",
    axis: normalize(axis),
    strength_mt: clamp(strengthMt, 0, STRENGTH_MAX_MT),
    freq_hz: clamp(freqHz, 0, FREQ_MAX_HZ),
  };
}

export function makePulse(dir: Vec3, strengthMt: number, durationMs: number): Pulse {
  return {
    v: PROTOCOL_VERSION,
    type: "pulse",
    dir: normalize(dir),
    strength_mt: clamp(strengthMt, 1, 200),
    duration_ms: clamp(durationMs, 1, 1000),
  };
}

export function makePump(cycles: number, strengthMt: number): Pump {
  return {
    v: PROTOCOL_VERSION,
    type: "pump",
    cycles: Math.round(clamp(cycles, 1, 20)),
    strength_mt: clamp(strengthMt, 1, 200),
  };
}

export function makeSimple(type: "field_off" | "pause" | "resume"): Simple {
  return { v: PROTOCOL_VERSION, type };
}

export interface Outbox {
  send: (cmd: ClientCommand) => void;
}

/**
 * Steering funnel: queues the newest continuous command and flushes it at
 * most every 1/STEER_RATE_HZ seconds (latest wins in between); discrete
 * commands bypass the funnel. `now` is injectable for tests.
 */
export class SteeringLimiter {
  private pending: SetRotating | null = null;
  private lastSent = -Infinity;
  sent = 0;

  constructor(
    private outbox: Outbox,
    private rateHz: number = STEER_RATE_HZ,
    private now: () => number = () => performance.now() / 1000,
  ) {}

  steer(cmd: SetRotating): void {
    const t = this.now();
    if (t - this.lastSent >= 1 / this.rateHz) {
      this.outbox.send(cmd);
      this.lastSent = t;
      this.sent += 1;
      this.pending = null;
    } else {
      this.pending = cmd;
    }
  }

  /** Flush a deferred latest-wins command once the window reopens. */
  tick(): void {
    if (this.pending && this.now() - this.lastSent >= 1 / this.rateHz) {
      this.outbox.send(this.pending);
      this.lastSent = this.now();
      this.sent += 1;
      this.pending = null;
    }
  }

  sendDiscrete(cmd: ClientCommand): void {
    this.outbox.send(cmd);
  }
}
