import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ConsoleState, hullVertices, renderScene, worldFromScenario } from "../src/scene";
import { StateFrame, isStateFrame } from "../src/types";

const FRAME_LOG = JSON.parse(
  readFileSync(new URL("../../schemas/fixtures/frame_log.json", import.meta.url), "utf-8"),
) as StateFrame[];

const STATE: ConsoleState = {
  connected: true,
  stale: false,
  camera: { yawDeg: -20, pitchDeg: 30, scale: 3200, center: [0.05, 0, 0.01] },
  width: 900,
  height: 620,
};

const WORLD = worldFromScenario(`
world {
  ground flat
  obstacle wall height=9mm x=40mm
  water level=30mm from=60mm
  cargo sphere diameter=2mm x=90mm y=0mm z=4mm
}
`);

describe("renderScene is a pure function of (state, frame)", () => {
  it("replaying the recorded frame log reproduces identical screens", () => {
    const first = FRAME_LOG.map((f) => JSON.stringify(renderScene(STATE, f, WORLD)));
    const second = FRAME_LOG.map((f) => JSON.stringify(renderScene(STATE, f, WORLD)));
    expect(second).toEqual(first);
    // and the full replay matches the checked-in golden snapshot
    expect(first.join("\n")).toMatchSnapshot();
  });

  it("frames from the log are valid StateFrames", () => {
    for (const f of FRAME_LOG) expect(isStateFrame(f)).toBe(true);
  });

  it("fold fraction visibly compresses the hull", () => {
    const deployed = hullVertices(0);
    const folded = hullVertices(1);
    const height = (pts: ReturnType<typeof hullVertices>) =>
      Math.max(...pts.map((p) => p[2])) - Math.min(...pts.map((p) => p[2]));
    expect(height(folded)).toBeCloseTo(0.35 * height(deployed), 5);
  });

  it("mode badge follows the frame", () => {
    const frame = { ...FRAME_LOG[FRAME_LOG.length - 1], mode: "rolling" };
    const draws = renderScene(STATE, frame, WORLD);
    const texts = draws.filter((d) => d.kind === "text").map((d) => (d as { text: string }).text);
    expect(texts).toContain("mode: rolling");
  });

  it("paused frames raise the paused banner", () => {
    const frame = { ...FRAME_LOG[0], paused: true };
    const draws = renderScene(STATE, frame, WORLD);
    expect(draws.some((d) => d.kind === "banner" && d.text === "paused")).toBe(true);
  });

  it("stale connection raises the stale banner", () => {
    const draws = renderScene({ ...STATE, stale: true }, FRAME_LOG[0], WORLD);
    expect(draws.some((d) => d.kind === "banner" && d.text === "connection stale")).toBe(true);
  });

  it("disconnected state renders only the banner", () => {
    const draws = renderScene({ ...STATE, connected: false }, FRAME_LOG[0], WORLD);
    expect(draws).toHaveLength(1);
    expect(draws[0].kind).toBe("banner");
  });
});

describe("world sketch parsing", () => {
  it("extracts ground, wall, water and cargo", () => {
    expect(WORLD.ground).toBe(true);
    expect(WORLD.walls).toHaveLength(1);
    expect(WORLD.walls[0].x).toBeCloseTo(0.04, 9);
    expect(WORLD.walls[0].height).toBeCloseTo(0.009, 9);
    expect(WORLD.waterLevel).toBeCloseTo(0.03, 9);
    expect(WORLD.cargo[0].diameter).toBeCloseTo(0.002, 9);
  });

  it("ignores junk without throwing", () => {
    const sketch = worldFromScenario("world {\n  obstacle wall height=?? x=--\n}\n");
    expect(sketch.walls).toEqual([]);
  });
});
