import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, RequestSequencer } from "../src/api.js";

function mockFetch(routes: Record<string, { status?: number; body: unknown }>) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const route = Object.entries(routes).find(([prefix]) => url.startsWith(prefix));
    if (!route) {
      return new Response(JSON.stringify({ code: "NotFound", message: url }), { status: 404 });
    }
    const { status = 200, body } = route[1];
    return new Response(JSON.stringify(body), { status });
  };
  return { fetchFn, calls };
}

describe("ApiClient", () => {
  it("posts the whole filter with search requests", async () => {
    const { fetchFn, calls } = mockFetch({
      "/api/c/demo/search": { body: { total: 1, page: 0, page_size: 10, hits: [] } },
    });
    const client = new ApiClient("", fetchFn);
    const result = await client.search("demo", { fulltext_terms: ["kasse"] }, 2, 25);
    expect(result.total).toBe(1);
    const sent = JSON.parse(String(calls[0].init?.body));
    expect(sent).toEqual({
      filter: { fulltext_terms: ["kasse"] },
      page: 2,
      page_size: 25,
    });
  });

  it("encodes the filter into graph query parameters", async () => {
    const { fetchFn, calls } = mockFetch({
      "/api/c/demo/graph": { body: { nodes: [], edges: [] } },
    });
    const client = new ApiClient("", fetchFn);
    await client.graph("demo", "keyterm", 30, { lang: "de" });
    const url = new URL("http://x" + calls[0].url);
    expect(url.searchParams.get("kind")).toBe("keyterm");
    expect(url.searchParams.get("top_n")).toBe("30");
    expect(JSON.parse(url.searchParams.get("filter")!)).toEqual({ lang: "de" });
  });

  it("raises typed errors from error bodies", async () => {
    const { fetchFn } = mockFetch({
      "/api/c/demo/search": {
        status: 400,
        body: { code: "UnknownEntity", message: "424242" },
      },
    });
    const client = new ApiClient("", fetchFn);
    const error = await client.search("demo", { entity_ids: [424242] }).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.code).toBe("UnknownEntity");
    expect(error.status).toBe(400);
  });

  it("sends mutations as JSON posts", async () => {
    const { fetchFn, calls } = mockFetch({
      "/api/c/demo/entities/3/merge": { body: { merged: 3, into: 5, changed: true } },
    });
    const client = new ApiClient("", fetchFn);
    await client.mergeEntities("demo", 3, 5);
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ into: 5 });
  });
});

describe("RequestSequencer", () => {
  it("marks superseded responses as stale (latest wins)", async () => {
    const sequencer = new RequestSequencer();
    let releaseFirst!: () => void;
    const first = sequencer.run(
      () => new Promise<string>((resolve) => (releaseFirst = () => resolve("old"))),
    );
    const second = await sequencer.run(async () => "new");
    expect(second).toEqual({ stale: false, value: "new" });
    releaseFirst();
    expect(await first).toEqual({ stale: true });
  });

  it("propagates errors only for the newest request", async () => {
    const sequencer = new RequestSequencer();
    const outcome = await sequencer.run(async () => {
      throw new Error("boom");
    });
    expect(outcome.stale).toBe(false);
    expect(String(outcome.error)).toContain("boom");
  });
});
