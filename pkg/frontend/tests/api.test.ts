import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api";

function stubFetch(status: number, payload: unknown) {
  const mock = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
  }));
  vi.stubGlobal("fetch", mock);
  return mock;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("returns parsed payloads on success", async () => {
    stubFetch(200, { job_id: "job-1" });
    const client = new ApiClient("");
    await expect(
      client.train("ds", { input_columns: ["t"], target_column: "y" }),
    ).resolves.toEqual({ job_id: "job-1" });
  });

  it("surfaces 422 input errors through ApiError", async () => {
    stubFetch(422, { errors: [{ code: "MissingInput", name: "body" }] });
    const client = new ApiClient("");
    const error = await client.predict("m", { title: "x" }).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(422);
    expect(error.inputErrors).toEqual([{ code: "MissingInput", name: "body" }]);
  });

  it("surfaces preflight issues through ApiError", async () => {
    stubFetch(422, {
      issues: [{ code: "TargetMissing", severity: "error", subject: "y", message: "gone" }],
    });
    const client = new ApiClient("");
    const error = await client
      .train("ds", { input_columns: ["t"], target_column: "y" })
      .catch((e) => e);
    expect(error.preflightIssues[0].code).toBe("TargetMissing");
  });

  it("hits the documented endpoint paths", async () => {
    const mock = stubFetch(200, {});
    const client = new ApiClient("http://svc");
    await client.modelMetadata("m1");
    await client.cascadePlanPreview("ds1", "label");
    const urls = mock.mock.calls.map((c: unknown[]) => c[0]);
    expect(urls).toContain("http://svc/api/models/m1/metadata");
    expect(urls).toContain("http://svc/api/datasets/ds1/cascade-plan?target=label");
  });
});
