import { describe, expect, it } from "vitest";

import { DEFAULT_STATE, decodeHash, encodeHash, Selection,
         type ViewState } from "../src/state.js";

describe("url hash state", () => {
  it("round-trips a full state", () => {
    const state: ViewState = {
      view: "triage",
      datasetId: "ds-abc",
      sessionId: "s-1",
      classLabel: "dog",
      imageId: "P1/img1",
      page: 3,
      graphThreshold: 2,
      groupThreshold: 0.7,
      groupSize: 5,
    };
    expect(decodeHash(encodeHash(state))).toEqual(state);
  });

  it("decodes an empty hash to defaults", () => {
    expect(decodeHash("")).toEqual(DEFAULT_STATE);
    expect(decodeHash("#")).toEqual(DEFAULT_STATE);
  });

  it("falls back to the classes view on junk", () => {
    expect(decodeHash("#view=nonsense").view).toBe("classes");
  });

  it("keeps defaults out of the hash", () => {
    const hash = encodeHash(DEFAULT_STATE);
    expect(hash).toBe("#view=classes");
  });
});

describe("grid selection", () => {
  it("toggles ids", () => {
    const selection = new Selection();
    selection.toggle("a");
    expect(selection.has("a")).toBe(true);
    selection.toggle("a");
    expect(selection.has("a")).toBe(false);
  });

  it("prunes ids that are no longer displayed", () => {
    const selection = new Selection();
    selection.toggle("a");
    selection.toggle("b");
    selection.prune(["b", "c"]);
    expect(selection.list()).toEqual(["b"]);
  });

  it("clears after an action", () => {
    const selection = new Selection();
    selection.toggle("a");
    selection.clear();
    expect(selection.size).toBe(0);
  });

  it("lists ids sorted for deterministic payloads", () => {
    const selection = new Selection();
    selection.toggle("z");
    selection.toggle("a");
    expect(selection.list()).toEqual(["a", "z"]);
  });
});
