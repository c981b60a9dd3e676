/**
 * Typed client for the onionscope /v1 HTTP+JSON API.
 *
 * The console talks to the backend through this module only. Response
 * types mirror the server payloads field for field; nothing is renamed
 * or recomputed on the way through.
 */

export interface SearchHit {
  domain: string;
  score: number;
  matched_pages: string[];
  category: string | null;
  language: string | null;
  illicit: boolean | null;
  tracked: boolean | null;
  status: string;
  page_count: number;
}

export interface SearchResponse {
  hits: SearchHit[];
  total: number;
  facets: Record<string, Record<string, number>>;
}

export interface DomainRecordJson {
  domain: string;
  version: string;
  status_history: [number, boolean][];
  language: string | null;
  illicit: boolean | null;
  illicit_score: number | null;
  category: string | null;
  template_cluster_id: number | null;
  tracking: boolean | null;
  attributed_addresses: string[];
  page_count: number;
}

export interface DomainResponse {
  record: DomainRecordJson;
  status: string;
  pages: string[];
  mirror_members: string[];
  attributed_wallets: string[];
  address_wallets: Record<string, string>;
  outbound_flagged_urls: string[];
}

export interface RisMatch {
  src_url: string;
  page_url: string;
  perceptual_hash: string;
  distance: number;
}

export interface RisResponse {
  query_hash: string;
  groups: Record<string, RisMatch[]>;
}

export interface WalletJson {
  wallet_id: string;
  addresses: string[];
  labels: string[];
  outlier: boolean;
  features: Record<string, string>;
}

export interface WalletEdgeJson {
  src: string;
  dst: string;
  n_transactions: number;
  total_satoshis: number;
  total_usd: string;
}

export interface WalletResponse {
  wallet: WalletJson;
  neighbors: WalletEdgeJson[];
}

export interface StatusSummary {
  domains: number;
  documents: number;
  wallets: number;
  images: number;
  by_status: Record<string, number>;
  by_category: Record<string, number>;
  by_language: Record<string, number>;
  availability: unknown;
}

export interface SearchParams {
  q?: string;
  category?: string;
  language?: string;
  illicit?: boolean;
  tracked?: boolean;
  status?: string;
  page?: number;
  page_size?: number;
}

export interface RisRequest {
  hash_hex?: string;
  image_b64?: string;
  max_distance?: number;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`API ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

function searchQueryString(params: SearchParams): string {
  const qs = new URLSearchParams();
  if (params.q) qs.set("q", params.q);
  if (params.category != null) qs.set("category", params.category);
  if (params.language != null) qs.set("language", params.language);
  if (params.illicit != null) qs.set("illicit", String(params.illicit));
  if (params.tracked != null) qs.set("tracked", String(params.tracked));
  if (params.status != null) qs.set("status", params.status);
  if (params.page != null) qs.set("page", String(params.page));
  if (params.page_size != null) qs.set("page_size", String(params.page_size));
  const s = qs.toString();
  return s ? `?${s}` : "";
}

export class ApiClient {
  constructor(
    readonly base: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    return this.request<T>("GET", path, undefined, signal);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers: body !== undefined ? { "content-type": "application/json" } : undefined,
        body: body !== undefined ? JSON.stringify(body) : undefined,
        signal: signal ?? null,
      });
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(0, err instanceof Error ? err.message : "network failure");
    }
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const payload = (await res.json()) as { detail?: unknown };
        if (typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  /** Generic entry point used by the view controller's request plans. */
  call<T>(method: string, path: string, body?: unknown,
          signal?: AbortSignal): Promise<T> {
    return this.request<T>(method, path, body, signal);
  }

  search(params: SearchParams, signal?: AbortSignal): Promise<SearchResponse> {
    return this.get(`/v1/search${searchQueryString(params)}`, signal);
  }

  domain(name: string, signal?: AbortSignal): Promise<DomainResponse> {
    return this.get(`/v1/domains/${encodeURIComponent(name)}`, signal);
  }

  ris(req: RisRequest, signal?: AbortSignal): Promise<RisResponse> {
    return this.request("POST", "/v1/ris", req, signal);
  }

  wallet(id: string, signal?: AbortSignal): Promise<WalletResponse> {
    return this.get(`/v1/wallets/${encodeURIComponent(id)}`, signal);
  }

  graphStats(signal?: AbortSignal): Promise<Record<string, unknown>> {
    return this.get("/v1/graph/stats", signal);
  }

  statusSummary(signal?: AbortSignal): Promise<StatusSummary> {
    return this.get("/v1/status/summary", signal);
  }
}

export { searchQueryString };
