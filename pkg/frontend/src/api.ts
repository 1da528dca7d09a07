/**
 * Typed client for the backend API with a per-URL response cache.
 *
 * The cache key is the request URL and chart style is never part of a
 * URL, so switching chart styles re-renders entirely from cache; only a
 * genuinely new (election, metric) selection touches the network.
 */

import type {
  CandidateTrend,
  CatalogEntry,
  ElectionType,
  PartySeriesPayload,
  PartySummary,
  WinnerMatrix,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly url: string,
    detail: string,
  ) {
    super(`${status} for ${url}: ${detail}`);
  }
}

type FetchLike = (url: string) => Promise<Response>;

export class ApiClient {
  private cache = new Map<string, Promise<unknown>>();

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private request<T>(path: string, parse: (response: Response) => Promise<T>): Promise<T> {
    const url = this.base + path;
    const cached = this.cache.get(url);
    if (cached) {
      return cached as Promise<T>;
    }
    const pending = this.fetchFn(url)
      .then(async (response) => {
        if (!response.ok) {
          throw new ApiError(response.status, url, await response.text());
        }
        return parse(response);
      })
      .catch((error) => {
        this.cache.delete(url); // failures are retryable
        throw error;
      });
    this.cache.set(url, pending);
    return pending;
  }

  private json<T>(path: string): Promise<T> {
    return this.request(path, (response) => response.json() as Promise<T>);
  }

  private text(path: string): Promise<string> {
    return this.request(path, (response) => response.text());
  }

  clearCache(): void {
    this.cache.clear();
  }

  catalog(): Promise<CatalogEntry[]> {
    return this.json("/api/elections");
  }

  summary(type: ElectionType, year: number): Promise<PartySummary[]> {
    return this.json(`/api/elections/${type}/${year}/results`);
  }

  mapSvg(type: ElectionType, year: number): Promise<string> {
    return this.text(`/api/maps/${type}/${year}.svg`);
  }

  candidateTrend(type: ElectionType, predict: number | null): Promise<CandidateTrend> {
    const suffix = predict === null ? "" : `&predict=${predict}`;
    return this.json(`/api/analytics/candidates/trend?type=${type}${suffix}`);
  }

  heatmap(type: ElectionType): Promise<WinnerMatrix> {
    return this.json(`/api/analytics/heatmap?type=${type}`);
  }

  partySeries(type: ElectionType, metric: string): Promise<PartySeriesPayload> {
    return this.json(`/api/analytics/series?type=${type}&metric=${metric}`);
  }
}
