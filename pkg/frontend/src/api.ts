/**
 * Typed client for the exploration API. The fetch implementation is
 * injectable so tests can run against a mock or a live server.
 */

import type {
  Aggregation,
  CollectionMeta,
  FilterQuery,
  Graph,
  SearchResult,
  UnitDetail,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof body.code === "string" ? body.code : "Internal";
      const message = typeof body.message === "string" ? body.message : response.statusText;
      throw new ApiError(code, message, response.status);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  collections(): Promise<{ collections: string[] }> {
    return this.request("/api/collections");
  }

  meta(collection: string): Promise<CollectionMeta> {
    return this.request(`/api/c/${collection}/meta`);
  }

  search(
    collection: string,
    filter: FilterQuery,
    page = 0,
    pageSize = 10,
  ): Promise<SearchResult> {
    return this.post(`/api/c/${collection}/search`, {
      filter,
      page,
      page_size: pageSize,
    });
  }

  graph(
    collection: string,
    kind: "entity" | "keyterm",
    topN: number,
    filter: FilterQuery,
  ): Promise<Graph> {
    const params = new URLSearchParams({
      kind,
      top_n: String(topN),
      filter: JSON.stringify(filter),
    });
    return this.request(`/api/c/${collection}/graph?${params}`);
  }

  aggregate(collection: string, field: string, filter: FilterQuery): Promise<Aggregation> {
    const params = new URLSearchParams({ field, filter: JSON.stringify(filter) });
    return this.request(`/api/c/${collection}/aggregate?${params}`);
  }

  unit(collection: string, unitId: string): Promise<UnitDetail> {
    return this.request(`/api/c/${collection}/units/${unitId}`);
  }

  mergeEntities(collection: string, source: number, into: number): Promise<unknown> {
    return this.post(`/api/c/${collection}/entities/${source}/merge`, { into });
  }

  blacklistEntity(collection: string, entityId: number): Promise<unknown> {
    return this.post(`/api/c/${collection}/entities/${entityId}/blacklist`, {});
  }

  tagUnit(collection: string, unitId: string, tag: string): Promise<unknown> {
    return this.post(`/api/c/${collection}/units/${unitId}/tags`, { tag });
  }

  annotate(
    collection: string,
    unitId: string,
    span: { start: number; end: number; type: string; label?: string },
  ): Promise<unknown> {
    return this.post(`/api/c/${collection}/units/${unitId}/annotations`, span);
  }
}

/**
 * Latest-wins sequencing for refresh bursts: results of superseded
 * requests are dropped so a stale response can never overwrite newer
 * state.
 */
export class RequestSequencer {
  private current = 0;

  async run<T>(fn: () => Promise<T>): Promise<{ stale: boolean; value?: T; error?: unknown }> {
    const token = ++this.current;
    try {
      const value = await fn();
      return token === this.current ? { stale: false, value } : { stale: true };
    } catch (error) {
      return token === this.current ? { stale: false, error } : { stale: true };
    }
  }
}
