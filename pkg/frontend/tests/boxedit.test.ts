import { describe, expect, it } from "vitest";

import { applyDrag, boxFromDrag, hitHandle, isValidBox, toArray,
         toBox } from "../src/boxedit.js";

const BOX = { x1: 10, y1: 20, x2: 50, y2: 60 };

describe("hitHandle", () => {
  it("grabs corners within tolerance", () => {
    expect(hitHandle(BOX, 11, 21)).toBe("nw");
    expect(hitHandle(BOX, 49, 19)).toBe("ne");
    expect(hitHandle(BOX, 9, 61)).toBe("sw");
    expect(hitHandle(BOX, 52, 62)).toBe("se");
  });

  it("grabs the interior as a move", () => {
    expect(hitHandle(BOX, 30, 40)).toBe("move");
  });

  it("misses outside", () => {
    expect(hitHandle(BOX, 100, 100)).toBeNull();
  });
});

describe("applyDrag", () => {
  it("moves the whole box", () => {
    expect(applyDrag(BOX, "move", 5, -5)).toEqual({ x1: 15, y1: 15, x2: 55, y2: 55 });
  });

  it("resizes from each corner", () => {
    expect(applyDrag(BOX, "nw", 2, 3)).toEqual({ x1: 12, y1: 23, x2: 50, y2: 60 });
    expect(applyDrag(BOX, "se", -2, -3)).toEqual({ x1: 10, y1: 20, x2: 48, y2: 57 });
    expect(applyDrag(BOX, "ne", 4, 1)).toEqual({ x1: 10, y1: 21, x2: 54, y2: 60 });
    expect(applyDrag(BOX, "sw", -1, 4)).toEqual({ x1: 9, y1: 20, x2: 50, y2: 64 });
  });

  it("can produce an inverted box, which validation rejects", () => {
    const inverted = applyDrag(BOX, "se", -60, 0);
    expect(isValidBox(inverted)).toBe(false);
  });
});

describe("isValidBox", () => {
  it("requires positive extent and non-negative origin", () => {
    expect(isValidBox(BOX)).toBe(true);
    expect(isValidBox({ x1: 10, y1: 10, x2: 10, y2: 20 })).toBe(false);
    expect(isValidBox({ x1: -1, y1: 0, x2: 5, y2: 5 })).toBe(false);
  });
});

describe("boxFromDrag", () => {
  it("normalizes any drag direction", () => {
    expect(boxFromDrag(50, 60, 10, 20)).toEqual({ x1: 10, y1: 20, x2: 50, y2: 60 });
  });

  it("rejects zero-area drags", () => {
    expect(boxFromDrag(10, 10, 10, 40)).toBeNull();
    expect(boxFromDrag(10, 10, 10, 10)).toBeNull();
  });
});

describe("conversions", () => {
  it("round-trips array and box forms", () => {
    expect(toArray(toBox([1, 2, 3, 4]))).toEqual([1, 2, 3, 4]);
  });
});
