// Pure scene construction: (console state, latest frame, world sketch) in,
// flat draw-command list out. The canvas layer just executes the list, so
// replaying a frame log reproduces identical screens byte for byte.

import { Quat, StateFrame, Vec3 } from "./types";

export interface WorldSketch {
  ground: boolean;
  waterLevel: number | null; // m
  waterFrom: number | null;
  walls: { x: number; height: number }[];
  cargo: { x: number; y: number; z: number; diameter: number }[];
}

export interface CameraPose {
  yawDeg: number;
  pitchDeg: number;
  scale: number; // px per meter
  center: Vec3;
}

export interface ConsoleState {
  connected: boolean;
  stale: boolean;
  camera: CameraPose;
  width: number;
  height: number;
}

export type Draw =
  | { kind: "poly"; pts: [number, number][]; stroke: string; width: number; fill?: string; close?: boolean }
  | { kind: "circle"; c: [number, number]; r: number; stroke: string; fill?: string }
  | { kind: "text"; p: [number, number]; text: string; color: string; size: number }
  | { kind: "banner"; text: string; color: string };

const TAU = Math.PI * 2;
const RADIUS = 3.9e-3;
const HEIGHT = 6.8e-3;
const H_MIN_RATIO = 0.35;
const REST_TWIST = Math.PI / 6;
const FOLD_EXTRA_TWIST = 1.53; // rad of additional twist at s = 1

function rotateByQuat(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  // v' = v + 2 q_vec x (q_vec x v + w v)
  const cx = y * v[2] - z * v[1] + w * v[0];
  const cy = z * v[0] - x * v[2] + w * v[1];
  const cz = x * v[1] - y * v[0] + w * v[2];
  return [
    v[0] + 2 * (y * cz - z * cy),
    v[1] + 2 * (z * cx - x * cz),
    v[2] + 2 * (x * cy - y * cx),
  ];
}

/** Body-frame hull vertices at fold fraction s (bottom ring then top ring). */
export function hullVertices(s: number): Vec3[] {
  const h = HEIGHT * (1 - s) + H_MIN_RATIO * HEIGHT * s;
  const phi = REST_TWIST + FOLD_EXTRA_TWIST * s;
  const pts: Vec3[] = [];
  for (let i = 0; i < 6; i++) {
    const a = (TAU * i) / 6;
    pts.push([RADIUS * Math.cos(a), RADIUS * Math.sin(a), -h / 2]);
  }
  for (let i = 0; i < 6; i++) {
    const a = (TAU * i) / 6 + phi;
    pts.push([RADIUS * Math.cos(a), RADIUS * Math.sin(a), +h / 2]);
  }
  return pts;
}

function project(cam: CameraPose, w: number, hPx: number, p: Vec3): [number, number] {
  const yaw = (cam.yawDeg * Math.PI) / 180;
  const pitch = (cam.pitchDeg * Math.PI) / 180;
  const dx = p[0] - cam.center[0];
  const dy = p[1] - cam.center[1];
  const dz = p[2] - cam.center[2];
  // orthographic: rotate about z (yaw), then tilt about the screen-x axis
  const rx = dx * Math.cos(yaw) + dy * Math.sin(yaw);
  const ry = -dx * Math.sin(yaw) + dy * Math.cos(yaw);
  const u = rx;
  const v = ry * Math.sin(pitch) + dz * Math.cos(pitch);
  const sx = w / 2 + u * cam.scale;
  const sy = hPx * 0.62 - v * cam.scale;
  return [Math.round(sx * 100) / 100, Math.round(sy * 100) / 100];
}

export function renderScene(state: ConsoleState, frame: StateFrame | null, world: WorldSketch): Draw[] {
  const out: Draw[] = [];
  const { camera, width, height } = state;
  const pr = (p: Vec3) => project(camera, width, height, p);

  if (!state.connected) {
    out.push({ kind: "banner", text: "disconnected", color: "#b91c1c" });
    return out;
  }

  // ground grid
  if (world.ground) {
    for (let i = 0; i <= 8; i++) {
      const x = -0.02 + i * 0.025;
      out.push({ kind: "poly", pts: [pr([x, -0.06, 0]), pr([x, 0.06, 0])], stroke: "#d4d4d8", width: 1 });
    }
    out.push({ kind: "poly", pts: [pr([-0.02, 0, 0]), pr([0.18, 0, 0])], stroke: "#a1a1aa", width: 1 });
  }
  // water band
  if (world.waterLevel !== null) {
    const x0 = world.waterFrom ?? -0.02;
    out.push({
      kind: "poly",
      pts: [pr([x0, 0, world.waterLevel]), pr([0.18, 0, world.waterLevel]),
            pr([0.18, 0, 0]), pr([x0, 0, 0])],
      stroke: "#60a5fa", width: 1, fill: "rgba(96,165,250,0.15)", close: true,
    });
  }
  for (const wall of world.walls) {
    out.push({
      kind: "poly",
      pts: [pr([wall.x, -0.03, 0]), pr([wall.x, 0.03, 0]),
            pr([wall.x, 0.03, wall.height]), pr([wall.x, -0.03, wall.height])],
      stroke: "#78716c", width: 2, fill: "rgba(120,113,108,0.25)", close: true,
    });
  }
  for (const c of world.cargo) {
    out.push({ kind: "circle", c: pr([c.x, c.y, c.z]), r: Math.max(2, c.diameter * camera.scale / 2), stroke: "#ca8a04", fill: "#fde68a" });
  }

  if (frame) {
    // robot hull: rings plus mountain bars, fold fraction applied
    const verts = hullVertices(frame.fold_s).map((p) => {
      const w = rotateByQuat(frame.orientation, p);
      return pr([w[0] + frame.position[0], w[1] + frame.position[1], w[2] + frame.position[2]]);
    });
    const bottom = verts.slice(0, 6);
    const top = verts.slice(6, 12);
    out.push({ kind: "poly", pts: bottom, stroke: "#1d4ed8", width: 2, close: true });
    out.push({ kind: "poly", pts: top, stroke: "#1d4ed8", width: 2, close: true });
    for (let i = 0; i < 6; i++) {
      out.push({ kind: "poly", pts: [bottom[i], top[i]], stroke: "#3b82f6", width: 1.5 });
    }
    // status badges
    out.push({ kind: "text", p: [12, 22], text: `mode: ${frame.mode}`, color: "#111827", size: 14 });
    out.push({
      kind: "text", p: [12, 40],
      text: `dose: ${(frame.dose_delivered * 1e9).toFixed(1)} ul`, color: "#111827", size: 13,
    });
    out.push({
      kind: "text", p: [12, 58],
      text: `bubble: ${(frame.bubble_volume * 1e9).toFixed(1)} ul`, color: "#111827", size: 13,
    });
    out.push({
      kind: "text", p: [12, 76],
      text: frame.cargo_attached ? "cargo: attached" : "cargo: free", color: "#111827", size: 13,
    });
    out.push({
      kind: "text", p: [12, 94],
      text: `t = ${frame.t.toFixed(2)} s  fold ${(frame.fold_s * 100).toFixed(0)}%`,
      color: "#6b7280", size: 12,
    });
    if (frame.paused) {
      out.push({ kind: "banner", text: "paused", color: "#b45309" });
    }
  }
  if (state.stale) {
    out.push({ kind: "banner", text: "connection stale", color: "#b91c1c" });
  }
  return out;
}

const UNIT_SCALE: Record<string, number> = { mm: 1e-3, m: 1, mT: 1e-3, T: 1,
  Hz: 1, s: 1, ms: 1e-3, deg: Math.PI / 180, ul: 1e-9 };

export function parseQuantity(text: string): number {
  const m = /^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-zA-Z]*)\s*$/.exec(text);
  if (!m) throw new Error(`not a quantity: ${text}`);
  const value = parseFloat(m[1]);
  if (!m[2]) return value;
  const scale = UNIT_SCALE[m[2]];
  if (scale === undefined) throw new Error(`unknown unit ${m[2]}`);
  return value * scale;
}

/** Just enough scenario parsing to sketch the world behind the robot. */
export function worldFromScenario(text: string): WorldSketch {
  const sketch: WorldSketch = { ground: false, waterLevel: null, waterFrom: null, walls: [], cargo: [] };
  let inWorld = false;
  for (const raw of text.split("\n")) {
    const line = raw.split("#")[0].trim();
    if (!line) continue;
    if (line === "world {") { inWorld = true; continue; }
    if (inWorld && line === "}") { inWorld = false; continue; }
    if (!inWorld) continue;
    const kv: Record<string, string> = {};
    const parts = line.split(/\s+/);
    for (const tok of parts.slice(1)) {
      const eq = tok.indexOf("=");
      if (eq > 0) kv[tok.slice(0, eq)] = tok.slice(eq + 1);
    }
    try {
      if (parts[0] === "ground") sketch.ground = true;
      else if (parts[0] === "water") {
        sketch.waterLevel = parseQuantity(kv.level);
        sketch.waterFrom = kv.from ? parseQuantity(kv.from) : null;
      } else if (parts[0] === "obstacle" && parts[1] === "wall") {
        sketch.walls.push({ x: parseQuantity(kv.x), height: parseQuantity(kv.height) });
      } else if (parts[0] === "cargo") {
        sketch.cargo.push({
          x: parseQuantity(kv.x), y: parseQuantity(kv.y), z: parseQuantity(kv.z),
          diameter: parseQuantity(kv.diameter),
        });
      }
    } catch {
      // sketch what parses; the server is the validator
    }
  }
  return sketch;
}
