import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { DATASET_ID, FakeService } from "./fake_service.js";

const BASE = "http://service.test";

function client(service = new FakeService()): { api: ApiClient; service: FakeService } {
  return { api: new ApiClient(BASE, service.fetch), service };
}

describe("url building", () => {
  it("appends only defined params, encoded", () => {
    const { api } = client();
    expect(api.url("/x", { a: 1, b: undefined, c: "d e" }))
      .toBe(`${BASE}/x?a=1&c=d%20e`);
    expect(api.url("/x")).toBe(`${BASE}/x`);
  });
});

describe("error mapping", () => {
  it("raises ApiError with the server's code", async () => {
    const { api } = client();
    const error = await api.session("missing").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(404);
    expect(error.code).toBe("unknown_session");
  });

  it("maps conflicts distinctly", async () => {
    const { api } = client();
    const { session_id } = await api.createSession(DATASET_ID);
    await api.postEvent(session_id, "eliminate_fp", { detection_ids: ["d3"] });
    const error = await api
      .postEvent(session_id, "eliminate_fp", { detection_ids: ["d3"] })
      .catch((e) => e);
    expect(error.status).toBe(409);
    expect(error.code).toBe("already_eliminated");
  });
});

describe("payload plumbing", () => {
  it("returns typed session detections", async () => {
    const { api } = client();
    const { session_id } = await api.createSession(DATASET_ID);
    const page = await api.sessionDetections(session_id, { class: "dog" });
    expect(page.total).toBe(3);
    expect(page.detections.map((d) => d.id)).toEqual(["d1", "d2", "d3"]);
  });

  it("returns export text verbatim, not re-parsed JSON", async () => {
    const { api } = client();
    const { session_id } = await api.createSession(DATASET_ID);
    const text = await api.exportText(session_id);
    expect(text.endsWith("\n")).toBe(true);
    expect(text.split("\n").filter(Boolean)).toHaveLength(4);
  });
});
