// Wire types shared with the simulation server (JSON, "v": 1 on every message).

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w, x, y, z

export interface StateFrame {
  v: number;
  type: "frame";
  t: number;
  position: Vec3;
  orientation: Quat;
  fold_s: number;
  mode: string;
  dose_delivered: number;
  bubble_volume: number;
  cargo_attached: boolean;
  paused: boolean;
  field: { type: string; [key: string]: unknown };
}

export interface SetRotating {
  v: number;
  type: "set_rotating";
  axis: Vec3;
  strength_mt: number;
  freq_hz: number;
}

export interface Pulse {
  v: number;
  type: "pulse";
  dir: Vec3;
  strength_mt: number;
  duration_ms: number;
}

export interface Pump {
  v: number;
  type: "pump";
  cycles: number;
  strength_mt: number;
}

export interface Simple {
  v: number;
  type: "field_off" | "pause" | "resume";
}

export type ClientCommand = SetRotating | Pulse | Pump | Simple;

export function isStateFrame(msg: unknown): msg is StateFrame {
  if (typeof msg !== "object" || msg === null) return false;
  const m = msg as Record<string, unknown>;
  return (
    m.v === PROTOCOL_VERSION &&
    m.type === "frame" &&
    typeof m.t === "number" &&
    Array.isArray(m.position) &&
    m.position.length === 3 &&
    Array.isArray(m.orientation) &&
    m.orientation.length === 4 &&
    typeof m.fold_s === "number" &&
    typeof m.mode === "string" &&
    typeof m.dose_delivered === "number" &&
    typeof m.bubble_volume === "number" &&
    typeof m.cargo_attached === "boolean"
  );
}
