// The shared wire fixtures (schemas/fixtures/) are the contract between the
// server and this console: both sides test against the same files.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { makePulse, makePump, makeSetRotating, makeSimple } from "../src/protocol";
import { isStateFrame } from "../src/types";

function fixture(name: string): unknown {
  return JSON.parse(
    readFileSync(new URL(`../../schemas/fixtures/${name}.json`, import.meta.url), "utf-8"),
  );
}

describe("server frame fixture", () => {
  it("parses as a StateFrame", () => {
    expect(isStateFrame(fixture("frame"))).toBe(true);
  });
});

describe("command fixtures match what this console emits", () => {
  it("set_rotating", () => {
    expect(makeSetRotating([0, 1, 0], 10, 4)).toEqual(fixture("set_rotating"));
  });
  it("pulse", () => {
    expect(makePulse([0, 0, 1], 40, 3)).toEqual(fixture("pulse"));
  });
  it("pump", () => {
    expect(makePump(3, 200)).toEqual(fixture("pump"));
  });
  it("simple commands", () => {
    expect(makeSimple("field_off")).toEqual(fixture("field_off"));
    expect(makeSimple("pause")).toEqual(fixture("pause"));
    expect(makeSimple("resume")).toEqual(fixture("resume"));
  });
});
